// Two-state Markov chain asset model: parameters, assumption checks and the
// closed-form scalars every other module builds on.
//
// The price obeys dS/S = f(alpha) dt where alpha jumps 1 -> 2 at rate lambda1
// and 2 -> 1 at rate lambda2. State 1 is the uptick regime (f1 > 0), state 2
// the downtick regime (f2 < 0).

#ifndef MCSELL_MODEL_HPP
#define MCSELL_MODEL_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace mcsell {

enum class State : int { Up = 1, Down = 2 };

inline State other(State s) { return s == State::Up ? State::Down : State::Up; }
inline int index_of(State s) { return static_cast<int>(s); }
State state_from_index(int i);

struct ModelParams {
  double f1 = 0.0;       // uptick return rate
  double f2 = 0.0;       // downtick return rate
  double lambda1 = 0.0;  // jump rate 1 -> 2
  double lambda2 = 0.0;  // jump rate 2 -> 1
  double rho = 0.0;      // discount rate
  double K = 0.0;        // fixed transaction cost

  double rate(State s) const { return s == State::Up ? f1 : f2; }
  double jump_rate(State s) const { return s == State::Up ? lambda1 : lambda2; }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

// Raised for non-finite values or non-positive lambda/rho/K. Distinct from an
// assumption violation, which is reported rather than thrown by validate().
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when an operation needs (A1) and/or (A2) and they do not hold.
class AssumptionError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

enum class Assumption {
  SignedRates,   // (A1): f1 > 0 and f2 < 0
  Discounting,   // (A2): Phi(rho) > 0, equivalently rho above the critical rate
};

struct Violation {
  Assumption assumption;
  std::string message;
};

const char* to_string(Assumption a);

// Throws ParameterError if params are malformed.
void check_well_formed(const ModelParams& params);

// Empty result iff (A1) and (A2) both hold. Throws ParameterError on malformed input.
std::vector<Violation> validate(const ModelParams& params);

// Phi(r) = (r + lambda1 - f1)(r + lambda2 - f2) - lambda1 lambda2.
double phi_at(const ModelParams& params, double r);
inline double phi(const ModelParams& params) { return phi_at(params, params.rho); }

// Larger root of Phi(r) = 0; selling is never optimal for rho at or below it.
double critical_rate(const ModelParams& params);

struct DerivedQuantities {
  double phi_rho = 0.0;
  double rho_crit = 0.0;
  double nu1 = 0.0;
  double nu2 = 0.0;
  double mu = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  double beta1 = 0.0;  // negative characteristic root
  double beta2 = 0.0;  // positive characteristic root
  double gamma1 = 0.0;
  double kappa2 = 0.0;
  double a0 = 0.0;     // slope of the particular solution A0 x + b0
  double b0 = 0.0;     // its intercept (not the critical rate)
};

// Pure function of params; assumption violations are allowed. Under (A1) the
// characteristic roots are real with opposite signs; when f1 f2 >= 0 they are
// reported as NaN.
DerivedQuantities derive(const ModelParams& params);

// Roots of f1 f2 b^2 - D1 b + D2 = 0 with f1 f2 < 0, ordered (negative, positive).
struct CharacteristicRoots {
  double negative;
  double positive;
};
CharacteristicRoots characteristic_roots(double f1f2, double d1, double d2);

// Residual of the characteristic polynomial, for checks.
inline double characteristic_residual(const ModelParams& p, const DerivedQuantities& d, double beta) {
  return p.f1 * p.f2 * beta * beta - d.d1 * beta + d.d2;
}

}  // namespace mcsell

#endif  // MCSELL_MODEL_HPP
