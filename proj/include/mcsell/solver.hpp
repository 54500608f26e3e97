// Optimal selling rule: thresholds and piecewise value functions.
//
// Case I (rho <= f1): sell only in the downtick state once S >= x*.
// Case II (rho > f1): additionally sell in the uptick state once S >= x0*.
// When (A2) fails it is never optimal to sell and no value function exists.

#ifndef MCSELL_SOLVER_HPP
#define MCSELL_SOLVER_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mcsell/model.hpp"

namespace mcsell {

enum class Regime { CaseI, CaseII, NeverSell };

const char* to_string(Regime r);
Regime regime_from_string(const std::string& s);

struct Diagnostic {
  std::string code;
  std::string message;
  std::map<std::string, double> values;
};

// Raised when the bracketing signs the theory guarantees for the Case II
// threshold equation do not hold.
class InternalContradiction : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Coefficients are stored anchored at their threshold:
//   a2_anchor = A2 (x*)^beta2      (= v(x*, 1))
//   c1_anchor = C1 (x0*)^gamma1
// so that A2 x^beta2 = a2_anchor (x/x*)^beta2. The raw A2 and C1 over- or
// underflow once the exponents reach a few hundred.
struct SellingRule {
  Regime regime = Regime::NeverSell;
  ModelParams params;
  DerivedQuantities derived;
  double x_star = 0.0;
  std::optional<double> x0_star;
  double a2_anchor = 0.0;
  std::optional<double> c1_anchor;
  std::optional<double> X0;
  std::vector<Diagnostic> diagnostics;

  double log_a2() const;
  double a2() const;
  std::optional<double> log_c1() const;
  std::optional<double> c1() const;

  bool has_diagnostic(const std::string& code) const;
};

struct CaseOneSolution {
  double x_star;
  double a2_anchor;
};

struct CaseTwoSolution {
  double x_star;
  double x0_star;
  double a2_anchor;
  double c1_anchor;
  double X0;
  bool within_bound;        // x* <= X0
  double phi_star_at_X0;    // <= 0 is sufficient for x* <= X0
};

// Throws AssumptionError if (A1) fails. Returns a NeverSell rule if (A2) fails.
SellingRule solve(const ModelParams& params);

CaseOneSolution solve_case1(const ModelParams& params, const DerivedQuantities& derived);

// Closed-form Case I threshold from the two continuity equations; used as a
// cross-check of solve_case1.
double case1_threshold_from_continuity(const ModelParams& params, const DerivedQuantities& derived);

CaseTwoSolution solve_case2(const ModelParams& params, const DerivedQuantities& derived);

// x0* - K - phi0(x0*), i.e. C1 (x0*)^gamma1, in a cancellation-free form.
double case2_c1_anchor(const ModelParams& params, const DerivedQuantities& derived);

// phi*(x) = C1 x^gamma1 + phi0(x) - (x - K)/kappa2; its zero on [K, x0*] is x*.
double phi_star(const ModelParams& params, const DerivedQuantities& derived, double x0_star,
                double c1_anchor, double x);

enum class Side { Left, Right };

// Piecewise value function. x == x* evaluates on the power branch and x == x0*
// on the C1 branch. Throws std::domain_error for x < 0 or a NeverSell rule.
double value(const SellingRule& rule, double x, State i);

// One-sided evaluation: Left takes the branch to the left of a threshold,
// Right the branch to its right. Away from thresholds both agree with value().
double value(const SellingRule& rule, double x, State i, Side side);
double slope(const SellingRule& rule, double x, State i, Side side);

// Thresholds at which v(., i) switches branch.
std::vector<double> branch_points(const SellingRule& rule, State i);

// True iff (x, i) lies in the continuation (holding) region.
bool in_continuation(const SellingRule& rule, double x, State i);

}  // namespace mcsell

#endif  // MCSELL_SOLVER_HPP
