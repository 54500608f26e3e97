// Independent certification of a SellingRule against the HJB system
//
//   min{ rho v(x,i) - (A v)(x,i), v(x,i) - (x - K) } = 0,   i = 1, 2,
//
// where A is the generator of (S_t, alpha_t):
//   (A v)(x,1) = x f1 v'(x,1) + lambda1 (v(x,2) - v(x,1))
//   (A v)(x,2) = x f2 v'(x,2) + lambda2 (v(x,1) - v(x,2)).
//
// On the continuation region the first term must vanish and the obstacle
// term be nonnegative; on the stopping region the roles swap. Derivatives are
// analytic per branch.

#ifndef MCSELL_VERIFIER_HPP
#define MCSELL_VERIFIER_HPP

#include <optional>
#include <string>
#include <vector>

#include "mcsell/solver.hpp"

namespace mcsell {

// Thrown by generator_apply when x sits on a branch point and no side is given.
class KinkError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct GridSpec {
  double x_min = 0.0;
  double x_max = 0.0;
  std::size_t n = 0;
  bool log_spaced = true;

  std::vector<double> points() const;
};

// [x*/100, 3 max(x*, x0*)], log-spaced.
GridSpec default_grid(const SellingRule& rule, std::size_t n = 2001);

struct Tolerances {
  double rel = 1e-8;
  double abs_per_cost = 1e-12;  // absolute tolerance is abs_per_cost * K
  double smooth_fit_rel = 1e-9;
};

double generator_apply(const SellingRule& rule, double x, State i);
double generator_apply(const SellingRule& rule, double x, State i, Side side);

// rho v - A v, analytic.
double hjb_residual(const SellingRule& rule, double x, State i, Side side = Side::Left);

// Same quantity with v' replaced by a central difference of step 1e-6 x.
// Only meaningful away from branch points.
double hjb_residual_fd(const SellingRule& rule, double x, State i);

struct ResidualCheck {
  std::string name;
  double max_abs = 0.0;     // largest |rho v - A v|
  double max_scaled = 0.0;  // largest |rho v - A v| / (rho v + rho K)
  std::size_t n_points = 0;
  bool passed = true;
};

struct InequalityCheck {
  std::string name;
  double min_slack = 0.0;     // most negative slack seen (price or price*rate units)
  double min_scaled = 0.0;    // same, divided by its tolerance scale
  std::size_t n_points = 0;
  bool passed = true;
};

struct KinkCheck {
  std::string name;
  double x = 0.0;
  double left_slope = 0.0;
  double right_slope = 0.0;
  std::string expectation;  // "smooth", "left_slope_below_one", "left_slope_at_most_one"
  double tolerance = 0.0;   // relative; widened at x* when x* - K is tiny
  bool passed = true;
};

struct LemmaCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  std::string relation;  // e.g. "lhs > rhs"
  bool passed = true;
};

struct VerificationReport {
  Regime regime = Regime::NeverSell;
  GridSpec grid;
  Tolerances tolerances;
  double residual_max = 0.0;
  std::vector<ResidualCheck> residuals;
  std::vector<InequalityCheck> inequality_margins;
  std::vector<KinkCheck> kink_report;
  std::vector<LemmaCheck> lemma_results;
  bool passed = false;

  std::vector<std::string> failures() const;
};

// Throws std::domain_error for a NeverSell rule.
VerificationReport verify(const SellingRule& rule, const GridSpec& grid, const Tolerances& tol = {});
VerificationReport verify(const SellingRule& rule);

// Numeric predicates of the auxiliary inequalities the closed forms rely on.
std::vector<LemmaCheck> lemma_checks(const SellingRule& rule);

}  // namespace mcsell

#endif  // MCSELL_VERIFIER_HPP
