#include "mcsell/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace mcsell {

std::vector<double> GridSpec::points() const {
  if (n == 0) return {};
  if (!(x_min > 0.0) || !(x_max >= x_min))
    throw std::invalid_argument("grid requires 0 < x_min <= x_max");
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = x_min;
    return out;
  }
  const double span = static_cast<double>(n - 1);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) / span;
    out[k] = log_spaced ? x_min * std::pow(x_max / x_min, t) : x_min + (x_max - x_min) * t;
  }
  out.back() = x_max;
  return out;
}

GridSpec default_grid(const SellingRule& rule, std::size_t n) {
  const double top = rule.x0_star ? std::max(rule.x_star, *rule.x0_star) : rule.x_star;
  return {rule.x_star / 100.0, 3.0 * top, n, true};
}

namespace {

bool is_branch_point(const SellingRule& rule, double x, State i) {
  const auto pts = branch_points(rule, i);
  return std::find(pts.begin(), pts.end(), x) != pts.end();
}

void require_positive_price(double x) {
  if (!(x > 0.0)) throw std::domain_error("generator requires x > 0");
}

}  // namespace

double generator_apply(const SellingRule& rule, double x, State i, Side side) {
  require_positive_price(x);
  const auto& p = rule.params;
  const double vi = value(rule, x, i, side);
  const double vj = value(rule, x, other(i), side);
  return x * p.rate(i) * slope(rule, x, i, side) + p.jump_rate(i) * (vj - vi);
}

double generator_apply(const SellingRule& rule, double x, State i) {
  require_positive_price(x);
  if (is_branch_point(rule, x, i))
    throw KinkError("x is a branch point of v(., " + std::to_string(index_of(i)) +
                    "); request a one-sided evaluation");
  return generator_apply(rule, x, i, Side::Left);
}

double hjb_residual(const SellingRule& rule, double x, State i, Side side) {
  return rule.params.rho * value(rule, x, i, side) - generator_apply(rule, x, i, side);
}

double hjb_residual_fd(const SellingRule& rule, double x, State i) {
  require_positive_price(x);
  const auto& p = rule.params;
  const double h = 1e-6 * x;
  const double dv = (value(rule, x + h, i) - value(rule, x - h, i)) / (2.0 * h);
  const double vi = value(rule, x, i);
  const double vj = value(rule, x, other(i));
  return p.rho * vi - (x * p.rate(i) * dv + p.jump_rate(i) * (vj - vi));
}

std::vector<std::string> VerificationReport::failures() const {
  std::vector<std::string> out;
  for (const auto& c : residuals)
    if (!c.passed) out.push_back(c.name);
  for (const auto& c : inequality_margins)
    if (!c.passed) out.push_back(c.name);
  for (const auto& c : kink_report)
    if (!c.passed) out.push_back(c.name);
  for (const auto& c : lemma_results)
    if (!c.passed) out.push_back(c.name);
  return out;
}

std::vector<LemmaCheck> lemma_checks(const SellingRule& rule) {
  const auto& p = rule.params;
  const auto& d = rule.derived;
  std::vector<LemmaCheck> out;
  auto add = [&](std::string name, double lhs, double rhs, std::string rel, bool ok) {
    out.push_back({std::move(name), lhs, rhs, std::move(rel), ok});
  };
  add("beta2_above_one", d.beta2, 1.0, "lhs > rhs", d.beta2 > 1.0);
  add("kappa2_positive", d.kappa2, 0.0, "lhs > rhs", d.kappa2 > 0.0);
  add("kappa2_below_one", d.kappa2, 1.0, "lhs < rhs", d.kappa2 < 1.0);

  const double cost_bound = p.K * d.beta2 / (d.beta2 - 1.0);
  if (rule.regime == Regime::CaseI) {
    // rho v(x,2) - A v(x,2) >= 0 above x* reduces to x >= this bound.
    const double bound = p.K * (p.rho + p.lambda1 - p.f1) * d.d2 / ((p.rho + p.lambda1) * d.phi_rho);
    add("stopping_bound_below_x_star", bound, rule.x_star, "lhs <= rhs",
        bound <= rule.x_star * (1.0 + 1e-12));
  } else if (rule.regime == Regime::CaseII) {
    const double x0_closed = p.rho * p.K / (p.rho - p.f1);
    add("cost_bound_below_x0_star", cost_bound, x0_closed, "lhs < rhs", cost_bound < x0_closed);
    const double margin = p.lambda2 - d.kappa2 * (p.rho + p.lambda2 - p.f2);
    add("lambda2_margin_positive", margin, 0.0, "lhs > rhs", margin > 0.0);
    add("x_star_below_cost_bound", rule.x_star, cost_bound, "lhs <= rhs",
        rule.x_star <= cost_bound * (1.0 + 1e-12));
    // 1e-11 leaves room for a rule read back from 12-digit JSON.
    add("x0_star_closed_form", *rule.x0_star, x0_closed, "lhs == rhs",
        std::abs(*rule.x0_star - x0_closed) <= 1e-11 * x0_closed);
  }
  return out;
}

namespace {

class CheckSet {
 public:
  void residual(const std::string& name, double r, double scale, double tol) {
    auto& c = residuals_[name];
    c.name = name;
    c.max_abs = std::max(c.max_abs, std::abs(r));
    c.max_scaled = std::max(c.max_scaled, std::abs(r) / scale);
    ++c.n_points;
    if (std::abs(r) > tol) c.passed = false;
  }

  void inequality(const std::string& name, double slack, double scale, double tol) {
    auto [it, fresh] = inequalities_.try_emplace(name);
    auto& c = it->second;
    c.name = name;
    if (fresh || slack < c.min_slack) c.min_slack = slack;
    if (fresh || slack / scale < c.min_scaled) c.min_scaled = slack / scale;
    ++c.n_points;
    if (slack < -tol) c.passed = false;
  }

  std::vector<ResidualCheck> residuals() const { return values(residuals_); }
  std::vector<InequalityCheck> inequalities() const { return values(inequalities_); }

 private:
  template <class T>
  static std::vector<T> values(const std::map<std::string, T>& m) {
    std::vector<T> out;
    for (const auto& [_, v] : m) out.push_back(v);
    return out;
  }
  std::map<std::string, ResidualCheck> residuals_;
  std::map<std::string, InequalityCheck> inequalities_;
};

std::string state_tag(State i) { return "state" + std::to_string(index_of(i)); }

}  // namespace

VerificationReport verify(const SellingRule& rule, const GridSpec& grid, const Tolerances& tol) {
  if (rule.regime == Regime::NeverSell)
    throw std::domain_error("nothing to verify in the never-sell regime");

  const auto& p = rule.params;
  const double tol_abs = tol.abs_per_cost * p.K;
  VerificationReport rep;
  rep.regime = rule.regime;
  rep.grid = grid;
  rep.tolerances = tol;

  CheckSet checks;
  for (double x : grid.points()) {
    // Nudge off branch points so each evaluation has a unique derivative.
    if (is_branch_point(rule, x, State::Up) || is_branch_point(rule, x, State::Down))
      x = std::nextafter(x, 0.0);
    for (State i : {State::Up, State::Down}) {
      const double v = value(rule, x, i);
      const double r = hjb_residual(rule, x, i);
      const double obstacle = v - (x - p.K);
      const double hjb_scale = p.rho * std::abs(v) + p.rho * p.K;
      const double obs_scale = std::abs(v) + p.K;
      const double hjb_tol = tol_abs + tol.rel * hjb_scale;
      const double obs_tol = tol_abs + tol.rel * obs_scale;
      const auto tag = state_tag(i);
      if (in_continuation(rule, x, i)) {
        checks.residual("hjb_equality_" + tag, r, hjb_scale, hjb_tol);
        rep.residual_max = std::max(rep.residual_max, std::abs(r));
        checks.inequality("obstacle_" + tag + "_continuation", obstacle, obs_scale, obs_tol);
      } else {
        checks.residual("obstacle_equality_" + tag, obstacle, obs_scale, obs_tol);
        checks.inequality("hjb_" + tag + "_stopping", r, hjb_scale, hjb_tol);
      }
    }
  }

  // Continuity across every branch point.
  for (State i : {State::Up, State::Down}) {
    for (double t : branch_points(rule, i)) {
      const double left = value(rule, t, i, Side::Left);
      const double right = value(rule, t, i, Side::Right);
      const double scale = std::abs(left) + p.K;
      const std::string where = (t == rule.x_star) ? "x_star" : "x0_star";
      checks.inequality("continuity_" + state_tag(i) + "_at_" + where, -std::abs(left - right), scale,
                        tol_abs + tol.rel * scale);
    }
  }
  rep.residuals = checks.residuals();
  rep.inequality_margins = checks.inequalities();

  // One-sided slopes at the thresholds. The power-branch slope at x* is
  // beta2 (x* - K) / (kappa2 x*); an ulp of error in x* moves it by about
  // eps x* / (x* - K) relative, which matters when x* sits just above K.
  const double eps = std::numeric_limits<double>::epsilon();
  const double conditioning =
      rule.x_star > p.K ? std::min(16.0 * eps * rule.x_star / (rule.x_star - p.K), 1e-6) : 0.0;
  auto kink = [&](std::string name, double x, State i, std::string expectation) {
    KinkCheck k;
    k.name = std::move(name);
    k.x = x;
    k.left_slope = slope(rule, x, i, Side::Left);
    k.right_slope = slope(rule, x, i, Side::Right);
    k.expectation = std::move(expectation);
    k.tolerance = tol.smooth_fit_rel + (x == rule.x_star ? conditioning : 0.0);
    if (k.expectation == "smooth")
      k.passed = std::abs(k.left_slope - k.right_slope) <=
                 k.tolerance * std::max(std::abs(k.left_slope), std::abs(k.right_slope));
    else if (k.expectation == "left_slope_below_one")
      k.passed = k.left_slope < 1.0;
    else
      k.passed = k.left_slope <= 1.0 + k.tolerance;
    rep.kink_report.push_back(k);
  };
  kink("state1_at_x_star", rule.x_star, State::Up, "smooth");
  if (rule.regime == Regime::CaseI) {
    kink("state2_at_x_star", rule.x_star, State::Down, "left_slope_below_one");
  } else {
    kink("state2_at_x_star", rule.x_star, State::Down, "left_slope_at_most_one");
    kink("state1_at_x0_star", *rule.x0_star, State::Up, "left_slope_at_most_one");
  }

  rep.lemma_results = lemma_checks(rule);
  rep.passed = rep.failures().empty();
  return rep;
}

VerificationReport verify(const SellingRule& rule) { return verify(rule, default_grid(rule)); }

}  // namespace mcsell
