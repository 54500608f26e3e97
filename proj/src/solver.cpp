#include "mcsell/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mcsell {

const char* to_string(Regime r) {
  switch (r) {
    case Regime::CaseI: return "CaseI";
    case Regime::CaseII: return "CaseII";
    case Regime::NeverSell: return "NeverSell";
  }
  return "?";
}

Regime regime_from_string(const std::string& s) {
  if (s == "CaseI") return Regime::CaseI;
  if (s == "CaseII") return Regime::CaseII;
  if (s == "NeverSell") return Regime::NeverSell;
  throw std::invalid_argument("unknown regime '" + s + "'");
}

double SellingRule::log_a2() const { return std::log(a2_anchor) - derived.beta2 * std::log(x_star); }
double SellingRule::a2() const { return std::exp(log_a2()); }

std::optional<double> SellingRule::log_c1() const {
  if (!c1_anchor || !x0_star) return std::nullopt;
  return std::log(*c1_anchor) - derived.gamma1 * std::log(*x0_star);
}

std::optional<double> SellingRule::c1() const {
  const auto l = log_c1();
  if (!l) return std::nullopt;
  return std::exp(*l);
}

bool SellingRule::has_diagnostic(const std::string& code) const {
  return std::any_of(diagnostics.begin(), diagnostics.end(),
                     [&](const Diagnostic& d) { return d.code == code; });
}

CaseOneSolution solve_case1(const ModelParams& p, const DerivedQuantities& d) {
  const double b2 = d.beta2;
  const double x_star = ((p.rho + p.lambda1 - p.f1) / (p.rho + p.lambda1)) * (p.K * b2 / (b2 - 1.0));
  // A0 x* + b0 with the common factor lambda1 K / (rho + lambda1) pulled out.
  const double anchor = p.lambda1 * p.K / ((p.rho + p.lambda1) * (b2 - 1.0));
  return {x_star, anchor};
}

double case1_threshold_from_continuity(const ModelParams& p, const DerivedQuantities& d) {
  return -(p.K + d.kappa2 * d.b0) / (d.kappa2 * d.a0 - 1.0);
}

double case2_c1_anchor(const ModelParams& p, const DerivedQuantities&) {
  // x0*(1 - A0) - (K + b0) = rho K / (rho + lambda1 - f1) - rho K / (rho + lambda1)
  return p.rho * p.K * p.f1 / ((p.rho + p.lambda1 - p.f1) * (p.rho + p.lambda1));
}

double phi_star(const ModelParams& p, const DerivedQuantities& d, double x0_star, double c1_anchor,
                double x) {
  return c1_anchor * std::pow(x / x0_star, d.gamma1) + d.a0 * x + d.b0 - (x - p.K) / d.kappa2;
}

CaseTwoSolution solve_case2(const ModelParams& p, const DerivedQuantities& d) {
  const double x0_star = p.rho * p.K / (p.rho - p.f1);
  const double c1_anchor = case2_c1_anchor(p, d);
  auto f = [&](double x) { return phi_star(p, d, x0_star, c1_anchor, x); };

  double lo = p.K;
  double hi = x0_star;
  const double f_lo = f(lo);
  const double f_hi = f(hi);
  if (!(f_lo > 0.0)) {
    std::ostringstream os;
    os << "phi*(K) = " << f_lo << " is not positive";
    throw InternalContradiction(os.str());
  }
  if (!(f_hi < 0.0)) {
    std::ostringstream os;
    os << "phi*(x0*) = " << f_hi << " is not negative";
    throw InternalContradiction(os.str());
  }
  // Bisect until the bracket cannot shrink further; this is well below the
  // 1e-13 x0* width the threshold needs.
  for (int it = 0; it < 2000; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (f(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  const double x_star = std::abs(f(lo)) <= std::abs(f(hi)) ? lo : hi;

  const double b2 = d.beta2;
  const double bound_a = p.K * b2 / (b2 - 1.0);
  const double bound_b = (p.lambda2 - d.kappa2 * (p.rho + p.lambda2)) * p.K /
                         (p.lambda2 - d.kappa2 * (p.rho + p.lambda2 - p.f2));
  const double X0 = std::min(bound_a, bound_b);

  CaseTwoSolution out;
  out.x_star = x_star;
  out.x0_star = x0_star;
  out.a2_anchor = (x_star - p.K) / d.kappa2;
  out.c1_anchor = c1_anchor;
  out.X0 = X0;
  out.within_bound = x_star <= X0;
  out.phi_star_at_X0 = f(X0);
  return out;
}

SellingRule solve(const ModelParams& params) {
  const auto violations = validate(params);
  for (const auto& v : violations)
    if (v.assumption == Assumption::SignedRates) throw AssumptionError(v.message);

  SellingRule rule;
  rule.params = params;
  rule.derived = derive(params);
  const auto& d = rule.derived;

  if (!violations.empty()) {
    rule.regime = Regime::NeverSell;
    rule.diagnostics.push_back({"never_sell", violations.front().message,
                                {{"phi_rho", d.phi_rho}, {"rho_crit", d.rho_crit}}});
    return rule;
  }

  if (params.rho <= params.f1) {
    const auto s = solve_case1(params, d);
    rule.regime = Regime::CaseI;
    rule.x_star = s.x_star;
    rule.a2_anchor = s.a2_anchor;
    return rule;
  }

  const auto s = solve_case2(params, d);
  rule.regime = Regime::CaseII;
  rule.x_star = s.x_star;
  rule.x0_star = s.x0_star;
  rule.a2_anchor = s.a2_anchor;
  rule.c1_anchor = s.c1_anchor;
  rule.X0 = s.X0;
  if (!s.within_bound) {
    std::ostringstream os;
    os.precision(12);
    os << "x* = " << s.x_star << " exceeds the admissibility bound X0 = " << s.X0
       << "; optimality is not guaranteed, run the verifier";
    rule.diagnostics.push_back({"x_star_exceeds_X0", os.str(),
                                {{"x_star", s.x_star}, {"X0", s.X0}, {"phi_star_at_X0", s.phi_star_at_X0}}});
  }
  return rule;
}

namespace {

enum class Branch { Power, Particular, Stop };

Branch branch_of(const SellingRule& r, double x, State i, Side side) {
  auto below = [&](double t) { return x < t || (x == t && side == Side::Left); };
  if (below(r.x_star)) return Branch::Power;
  if (i == State::Down) return Branch::Stop;
  if (r.regime == Regime::CaseI) return Branch::Particular;
  return below(*r.x0_star) ? Branch::Particular : Branch::Stop;
}

void require_evaluable(const SellingRule& r, double x) {
  if (r.regime == Regime::NeverSell)
    throw std::domain_error("no finite value function in the never-sell regime");
  if (!(x >= 0.0)) throw std::domain_error("price must be nonnegative");
}

}  // namespace

double value(const SellingRule& r, double x, State i) { return value(r, x, i, Side::Left); }

double value(const SellingRule& r, double x, State i, Side side) {
  require_evaluable(r, x);
  const auto& d = r.derived;
  switch (branch_of(r, x, i, side)) {
    case Branch::Power: {
      const double v1 = r.a2_anchor * std::pow(x / r.x_star, d.beta2);
      return i == State::Up ? v1 : d.kappa2 * v1;
    }
    case Branch::Particular: {
      double v = d.a0 * x + d.b0;
      if (r.regime == Regime::CaseII) v += *r.c1_anchor * std::pow(x / *r.x0_star, d.gamma1);
      return v;
    }
    case Branch::Stop:
      return x - r.params.K;
  }
  return 0.0;
}

double slope(const SellingRule& r, double x, State i, Side side) {
  require_evaluable(r, x);
  const auto& d = r.derived;
  switch (branch_of(r, x, i, side)) {
    case Branch::Power: {
      const double s1 = d.beta2 * r.a2_anchor * std::pow(x / r.x_star, d.beta2 - 1.0) / r.x_star;
      return i == State::Up ? s1 : d.kappa2 * s1;
    }
    case Branch::Particular: {
      double s = d.a0;
      if (r.regime == Regime::CaseII)
        s += d.gamma1 * *r.c1_anchor * std::pow(x / *r.x0_star, d.gamma1 - 1.0) / *r.x0_star;
      return s;
    }
    case Branch::Stop:
      return 1.0;
  }
  return 0.0;
}

std::vector<double> branch_points(const SellingRule& r, State i) {
  if (r.regime == Regime::NeverSell) return {};
  std::vector<double> out{r.x_star};
  if (i == State::Up && r.regime == Regime::CaseII) out.push_back(*r.x0_star);
  return out;
}

bool in_continuation(const SellingRule& r, double x, State i) {
  switch (r.regime) {
    case Regime::NeverSell: return true;
    case Regime::CaseI: return i == State::Up || x < r.x_star;
    case Regime::CaseII: return i == State::Up ? x < *r.x0_star : x < r.x_star;
  }
  return true;
}

}  // namespace mcsell
