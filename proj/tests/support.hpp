// Shared fixtures for the unit, property and acceptance tests.

#ifndef MCSELL_TESTS_SUPPORT_HPP
#define MCSELL_TESTS_SUPPORT_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "mcsell/model.hpp"
#include "mcsell/solver.hpp"

namespace testsupport {

// Two-regime reference with a closed-form up-state exit (rho > f1).
inline mcsell::ModelParams case2_reference() { return {0.07, -0.03, 1.0, 1.0, 0.10, 0.01}; }

// High-frequency fit with rho <= f1.
inline mcsell::ModelParams case1_reference() { return {4.89, -5.13, 135.25, 130.95, 0.03, 0.01}; }

// Half-year fits of a daily close series, with the printed Phi(0.03).
struct FittedRow {
  const char* period;
  double f1, f2, lambda1, lambda2;
  double phi_printed;
};

inline const std::array<FittedRow, 8>& fitted_rows() {
  static const std::array<FittedRow, 8> rows{{
      {"2009H1", 10.45, -10.61, 100.48, 124.23, -336.06},
      {"2009H2", 3.21, -2.32, 102.15, 141.44, -217.41},
      {"2010H1", 3.06, -3.15, 97.98, 127.02, -83.18},
      {"2010H2", 2.27, -1.92, 103.57, 134.25, -103.09},
      {"2011H1", 1.80, -1.85, 117.19, 125.00, -5.02},
      {"2011H2", 3.01, -2.72, 97.98, 107.95, -60.56},
      {"2012H1", 5.39, -4.80, 108.21, 127.19, -185.32},
      {"2012H2", 4.89, -5.13, 135.25, 130.95, 35.79},
  }};
  return rows;
}

// Straight product form, deliberately not sharing code with the library.
inline double phi_oracle(double f1, double f2, double l1, double l2, double r) {
  return (r + l1 - f1) * (r + l2 - f2) - l1 * l2;
}

// Range of Phi(r) over inputs within +-half of the printed values. Phi is
// affine in each input separately, so the 16 corners bound it.
inline std::pair<double, double> phi_rounding_range(const FittedRow& row, double r, double half = 0.005) {
  double lo = INFINITY, hi = -INFINITY;
  for (int mask = 0; mask < 16; ++mask) {
    const auto pick = [&](double v, int bit) { return v + ((mask >> bit) & 1 ? half : -half); };
    const double v = phi_oracle(pick(row.f1, 0), pick(row.f2, 1), pick(row.lambda1, 2), pick(row.lambda2, 3), r);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return {lo, hi};
}

// Uniform draw from f1 in (0,10], f2 in [-10,0), lambdas in (0,200],
// rho in (0,5], K in (0,1], rejected until (A1), (A2) hold in the wanted regime.
inline mcsell::ModelParams random_admissible(std::mt19937_64& rng, mcsell::Regime regime) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const auto open_left = [&](double hi) { return hi * (1.0 - u01(rng)); };  // (0, hi]
  for (int attempt = 0; attempt < 100000; ++attempt) {
    mcsell::ModelParams p;
    p.f1 = open_left(10.0);
    p.f2 = -open_left(10.0);
    p.lambda1 = open_left(200.0);
    p.lambda2 = open_left(200.0);
    p.rho = open_left(5.0);
    p.K = open_left(1.0);
    if (!mcsell::validate(p).empty()) continue;
    const bool case1 = p.rho <= p.f1;
    if ((regime == mcsell::Regime::CaseI) == case1) return p;
  }
  throw std::runtime_error("no admissible draw found");
}

inline bool close_rel(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b));
}

}  // namespace testsupport

#endif  // MCSELL_TESTS_SUPPORT_HPP
