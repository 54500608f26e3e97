// Moment and sign-change estimators for the two-state model from a
// uniformly sampled close series.
//
// With Delta Z_k the log-increments, sigma0^2 their sample variance and
// R = nu1/nu2:
//   mu      = Y_T / T
//   lambda1 = (R1 + R2/R) / T,   lambda2 = (R R1 + R2) / T
//   sigma1  = sigma0/sqrt(delta) * sqrt(lambda1 (lambda1 + lambda2) / (2 lambda2))
//   sigma2  = sigma0/sqrt(delta) * sqrt(lambda2 (lambda1 + lambda2) / (2 lambda1))
//   f1 = mu + sigma1,  f2 = mu - sigma2
// where R1 counts down-to-up and R2 up-to-down sign changes.

#ifndef MCSELL_CALIBRATION_HPP
#define MCSELL_CALIBRATION_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include "mcsell/model.hpp"

namespace mcsell {

inline constexpr double kTradingDaysPerYear = 252.0;

struct PriceSeries {
  std::vector<std::string> timestamps;  // labels only; spacing is taken as uniform
  std::vector<double> closes;
  double delta = 1.0 / kTradingDaysPerYear;

  std::size_t size() const { return closes.size(); }
  std::size_t n_increments() const { return closes.empty() ? 0 : closes.size() - 1; }
  double span() const { return static_cast<double>(n_increments()) * delta; }

  // Sub-series of closes [first, first + count).
  PriceSeries slice(std::size_t first, std::size_t count) const;
};

PriceSeries make_series(std::vector<double> closes, double delta = 1.0 / kTradingDaysPerYear);

class CalibrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CalibrationResult {
  double mu_hat = 0.0;
  double z_bar = 0.0;   // mean increment, diagnostic (about delta * mu)
  double sigma0 = 0.0;
  double R = 0.0;
  long R1 = 0;          // down-to-up sign changes
  long R2 = 0;          // up-to-down sign changes
  long n_up = 0;        // positive increments
  long n_down = 0;      // negative increments
  double lambda1_hat = 0.0;
  double lambda2_hat = 0.0;
  double sigma1 = 0.0;
  double sigma2 = 0.0;
  double f1_hat = 0.0;
  double f2_hat = 0.0;
  double rho = 0.0;
  double phi_rho = 0.0;
  double span = 0.0;
  double delta = 0.0;

  ModelParams params(double K) const { return {f1_hat, f2_hat, lambda1_hat, lambda2_hat, rho, K}; }
};

// Throws CalibrationError for fewer than three closes, non-positive prices or
// a series without both a down-to-up and an up-to-down transition.
CalibrationResult calibrate(const PriceSeries& series, double rho);

}  // namespace mcsell

#endif  // MCSELL_CALIBRATION_HPP
