#include "mcsell/calibration.hpp"

#include <cmath>
#include <string>

namespace mcsell {

PriceSeries PriceSeries::slice(std::size_t first, std::size_t count) const {
  if (first + count > closes.size()) throw std::out_of_range("slice exceeds the series");
  PriceSeries out;
  out.delta = delta;
  out.closes.assign(closes.begin() + first, closes.begin() + first + count);
  if (timestamps.size() == closes.size())
    out.timestamps.assign(timestamps.begin() + first, timestamps.begin() + first + count);
  return out;
}

PriceSeries make_series(std::vector<double> closes, double delta) {
  PriceSeries s;
  s.delta = delta;
  s.timestamps.reserve(closes.size());
  for (std::size_t k = 0; k < closes.size(); ++k) s.timestamps.push_back(std::to_string(k));
  s.closes = std::move(closes);
  return s;
}

CalibrationResult calibrate(const PriceSeries& series, double rho) {
  if (series.size() < 3) throw CalibrationError("calibration needs at least three closes");
  if (!(series.delta > 0.0)) throw CalibrationError("sampling step must be positive");
  for (double c : series.closes)
    if (!(c > 0.0) || !std::isfinite(c)) throw CalibrationError("closes must be positive and finite");

  const std::size_t n = series.n_increments();
  std::vector<double> dz(n);
  for (std::size_t k = 0; k < n; ++k) dz[k] = std::log(series.closes[k + 1]) - std::log(series.closes[k]);

  CalibrationResult r;
  r.rho = rho;
  r.delta = series.delta;
  r.span = series.span();
  r.mu_hat = std::log(series.closes.back() / series.closes.front()) / r.span;

  double sum = 0.0;
  for (double z : dz) sum += z;
  r.z_bar = sum / static_cast<double>(n);
  double ss = 0.0;
  for (double z : dz) ss += (z - r.z_bar) * (z - r.z_bar);
  r.sigma0 = std::sqrt(ss / static_cast<double>(n - 1));

  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (dz[k] < 0.0 && dz[k + 1] >= 0.0) ++r.R1;
    if (dz[k] > 0.0 && dz[k + 1] <= 0.0) ++r.R2;
  }
  for (double z : dz) {
    if (z > 0.0) ++r.n_up;
    if (z < 0.0) ++r.n_down;
  }
  if (r.R1 == 0) throw CalibrationError("degenerate series: no down-to-up transition (R1 = 0)");
  if (r.R2 == 0) throw CalibrationError("degenerate series: no up-to-down transition (R2 = 0)");

  r.R = static_cast<double>(r.n_up) / static_cast<double>(r.n_down);
  const double T = r.span;
  r.lambda1_hat = (static_cast<double>(r.R1) + static_cast<double>(r.R2) / r.R) / T;
  r.lambda2_hat = (r.R * static_cast<double>(r.R1) + static_cast<double>(r.R2)) / T;

  const double l1 = r.lambda1_hat;
  const double l2 = r.lambda2_hat;
  const double scale = r.sigma0 / std::sqrt(series.delta);
  r.sigma1 = scale * std::sqrt(l1 * (l1 + l2) / (2.0 * l2));
  r.sigma2 = scale * std::sqrt(l2 * (l1 + l2) / (2.0 * l1));
  r.f1_hat = r.mu_hat + r.sigma1;
  r.f2_hat = r.mu_hat - r.sigma2;
  r.phi_rho = phi_at(r.params(1.0), rho);
  return r;
}

}  // namespace mcsell
