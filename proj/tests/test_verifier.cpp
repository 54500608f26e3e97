#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "mcsell/verifier.hpp"
#include "support.hpp"

using namespace mcsell;

namespace {

bool has(const std::vector<std::string>& v, const std::string& s) { return std::find(v.begin(), v.end(), s) != v.end(); }

}  // namespace

TEST_CASE("two-regime reference certifies on a fine linear grid") {
  const auto rule = solve(testsupport::case2_reference());
  const auto rep = verify(rule, GridSpec{1e-4, 0.1, 10000, false});
  CHECK(rep.passed);
  CHECK(rep.failures().empty());
  CHECK(rep.regime == Regime::CaseII);
  CHECK(rep.residual_max < 1e-12);
  CHECK(rep.kink_report.size() == 3);
  for (const auto& k : rep.kink_report) {
    CAPTURE(k.name);
    CHECK(k.passed);
  }
}

TEST_CASE("high-frequency reference certifies") {
  const auto rule = solve(testsupport::case1_reference());
  const auto rep = verify(rule);
  CHECK(rep.passed);
  CHECK(rep.kink_report.size() == 2);
}

TEST_CASE("scaling A2 by 1.01 breaks certification") {
  for (const auto& p : {testsupport::case2_reference(), testsupport::case1_reference()}) {
    auto rule = solve(p);
    rule.a2_anchor *= 1.01;
    const auto rep = verify(rule);
    CHECK_FALSE(rep.passed);
    const auto f = rep.failures();
    CHECK(has(f, "continuity_state2_at_x_star"));
  }
}

TEST_CASE("moving x* breaks certification") {
  auto rule = solve(testsupport::case1_reference());
  rule.x_star *= 1.02;
  CHECK_FALSE(verify(rule).passed);
}

TEST_CASE("analytic residual agrees with a finite-difference one") {
  const auto rule = solve(testsupport::case2_reference());
  for (double x : {0.002, 0.008, 0.012, 0.02, 0.03, 0.05}) {
    for (State i : {State::Up, State::Down}) {
      CAPTURE(x);
      const double scale = rule.params.rho * (value(rule, x, i) + rule.params.K);
      CHECK(std::abs(hjb_residual(rule, x, i) - hjb_residual_fd(rule, x, i)) <= 1e-6 * scale);
    }
  }
}

TEST_CASE("Case I stopping residual in state 2 has a closed form") {
  const auto p = testsupport::case1_reference();
  const auto rule = solve(p);
  const auto& d = rule.derived;
  for (double m : {1.01, 1.5, 4.0, 50.0}) {
    const double x = m * rule.x_star;
    // v2 = x - K, v1 = A0 x + b0 above x*
    const double oracle = p.rho * (x - p.K) - (p.f2 * x + p.lambda2 * (d.a0 * x + d.b0 - (x - p.K)));
    CHECK(hjb_residual(rule, x, State::Down) == doctest::Approx(oracle).epsilon(1e-12));
    CHECK(oracle >= 0.0);
  }
}

TEST_CASE("generator needs a side at branch points") {
  const auto rule = solve(testsupport::case2_reference());
  CHECK_THROWS_AS(generator_apply(rule, rule.x_star, State::Down), KinkError);
  CHECK_THROWS_AS(generator_apply(rule, *rule.x0_star, State::Up), KinkError);
  CHECK_NOTHROW(generator_apply(rule, rule.x_star, State::Down, Side::Right));
  CHECK_NOTHROW(generator_apply(rule, *rule.x0_star, State::Down));
  CHECK_THROWS_AS(generator_apply(rule, 0.0, State::Up), std::domain_error);
}

TEST_CASE("lemma checks hold on random draws and fail when forced") {
  std::mt19937_64 rng(31);
  for (auto regime : {Regime::CaseI, Regime::CaseII}) {
    for (int k = 0; k < 100; ++k) {
      const auto rule = solve(testsupport::random_admissible(rng, regime));
      for (const auto& l : lemma_checks(rule)) {
        CAPTURE(l.name);
        CHECK(l.passed);
      }
    }
  }
  auto rule = solve(testsupport::case2_reference());
  rule.x0_star = *rule.x0_star * 1.001;
  const auto checks = lemma_checks(rule);
  const auto it = std::find_if(checks.begin(), checks.end(), [](const auto& l) { return l.name == "x0_star_closed_form"; });
  REQUIRE(it != checks.end());
  CHECK_FALSE(it->passed);
}

TEST_CASE("random draws certify") {
  std::mt19937_64 rng(32);
  for (auto regime : {Regime::CaseI, Regime::CaseII}) {
    for (int k = 0; k < 40; ++k) {
      const auto rule = solve(testsupport::random_admissible(rng, regime));
      const auto rep = verify(rule, default_grid(rule, 401));
      CHECK(rep.passed);
    }
  }
}

TEST_CASE("grid spec") {
  const auto pts = GridSpec{1.0, 100.0, 3, true}.points();
  REQUIRE(pts.size() == 3);
  CHECK(pts[1] == doctest::Approx(10.0));
  CHECK(GridSpec{1.0, 2.0, 5, false}.points()[2] == doctest::Approx(1.5));
  const GridSpec bad{0.0, 1.0, 3, true};
  CHECK_THROWS_AS(bad.points(), std::invalid_argument);
  const auto never = solve({10.45, -10.61, 100.48, 124.23, 0.03, 0.01});
  CHECK_THROWS_AS(verify(never), std::domain_error);
}
