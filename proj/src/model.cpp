#include "mcsell/model.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace mcsell {

State state_from_index(int i) {
  if (i == 1) return State::Up;
  if (i == 2) return State::Down;
  throw std::invalid_argument("state must be 1 or 2, got " + std::to_string(i));
}

const char* to_string(Assumption a) {
  switch (a) {
    case Assumption::SignedRates: return "A1";
    case Assumption::Discounting: return "A2";
  }
  return "?";
}

void check_well_formed(const ModelParams& p) {
  auto require_finite = [](double v, const char* name) {
    if (!std::isfinite(v)) throw ParameterError(std::string(name) + " must be finite");
  };
  auto require_positive = [&](double v, const char* name) {
    require_finite(v, name);
    if (!(v > 0.0)) throw ParameterError(std::string(name) + " must be positive");
  };
  require_finite(p.f1, "f1");
  require_finite(p.f2, "f2");
  require_positive(p.lambda1, "lambda1");
  require_positive(p.lambda2, "lambda2");
  require_positive(p.rho, "rho");
  require_positive(p.K, "K");
}

// Expanded so that the lambda1*lambda2 terms cancel symbolically rather than
// in floating point.
double phi_at(const ModelParams& p, double r) {
  return (r - p.f1) * (r - p.f2) + p.lambda1 * (r - p.f2) + p.lambda2 * (r - p.f1);
}

double critical_rate(const ModelParams& p) {
  // Phi(r) = r^2 - b r + c
  const double b = p.f1 - p.lambda1 + p.f2 - p.lambda2;
  const double c = p.f1 * p.f2 - p.lambda1 * p.f2 - p.lambda2 * p.f1;
  const double diff = (p.f1 - p.lambda1) - (p.f2 - p.lambda2);
  const double s = std::sqrt(diff * diff + 4.0 * p.lambda1 * p.lambda2);
  if (b >= 0.0) return 0.5 * (b + s);
  return 2.0 * c / (b - s);
}

std::vector<Violation> validate(const ModelParams& p) {
  check_well_formed(p);
  std::vector<Violation> out;
  if (!(p.f1 > 0.0) || !(p.f2 < 0.0)) {
    std::ostringstream os;
    os << "(A1) requires f1 > 0 and f2 < 0; got f1 = " << p.f1 << ", f2 = " << p.f2;
    out.push_back({Assumption::SignedRates, os.str()});
  }
  const double phi_rho = phi(p);
  const double crit = critical_rate(p);
  if (!(phi_rho > 0.0) || !(p.rho > crit)) {
    std::ostringstream os;
    os.precision(12);
    os << "(A2) requires Phi(rho) > 0 and rho > rho_crit; got Phi(" << p.rho << ") = " << phi_rho
       << ", rho_crit = " << crit;
    out.push_back({Assumption::Discounting, os.str()});
  }
  return out;
}

CharacteristicRoots characteristic_roots(double f1f2, double d1, double d2) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  if (!(f1f2 < 0.0)) return {nan, nan};
  // Both terms are nonnegative when f1 f2 < 0 and d2 > 0, so no cancellation here.
  const double s = std::sqrt(d1 * d1 - 4.0 * f1f2 * d2);
  if (d1 >= 0.0) {
    const double neg = (d1 + s) / (2.0 * f1f2);
    return {neg, 2.0 * d2 / (d1 + s)};
  }
  const double pos = (d1 - s) / (2.0 * f1f2);
  return {2.0 * d2 / (d1 - s), pos};
}

DerivedQuantities derive(const ModelParams& p) {
  check_well_formed(p);
  DerivedQuantities d;
  d.phi_rho = phi(p);
  d.rho_crit = critical_rate(p);
  d.nu1 = p.lambda2 / (p.lambda1 + p.lambda2);
  d.nu2 = p.lambda1 / (p.lambda1 + p.lambda2);
  d.mu = d.nu1 * p.f1 + d.nu2 * p.f2;
  d.d1 = (p.rho + p.lambda1) * p.f2 + (p.rho + p.lambda2) * p.f1;
  d.d2 = p.rho * (p.rho + p.lambda1 + p.lambda2);
  const auto roots = characteristic_roots(p.f1 * p.f2, d.d1, d.d2);
  d.beta1 = roots.negative;
  d.beta2 = roots.positive;
  d.gamma1 = (p.rho + p.lambda1) / p.f1;
  d.kappa2 = (p.rho + p.lambda1 - p.f1 * d.beta2) / p.lambda1;
  d.a0 = p.lambda1 / (p.rho + p.lambda1 - p.f1);
  d.b0 = -p.lambda1 * p.K / (p.rho + p.lambda1);
  return d;
}

}  // namespace mcsell
