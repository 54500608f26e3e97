// Exact simulation of (S_t, alpha_t) and Monte Carlo evaluation of selling
// rules.
//
// Holding times are exponential with rate lambda_state and the price moves as
// a piecewise exponential between jumps, so there is no time-step error.

#ifndef MCSELL_SIMULATOR_HPP
#define MCSELL_SIMULATOR_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "mcsell/model.hpp"
#include "mcsell/solver.hpp"

namespace mcsell {

using Rng = std::mt19937_64;

// Independent stream `stream` of the generator family seeded by `master_seed`.
// Path k of any study uses stream k, so results do not depend on scheduling.
Rng make_stream(std::uint64_t master_seed, std::uint64_t stream);

State sample_stationary_state(const ModelParams& params, Rng& rng);

struct JumpEvent {
  double time;
  State new_state;
  double price;  // price at the jump instant
};

struct ChainPath {
  ModelParams params;
  State initial_state = State::Up;
  double initial_price = 0.0;
  std::vector<JumpEvent> events;
  double horizon = 0.0;

  State state_at(double t) const;
  double price_at(double t) const;
  double terminal_price() const { return price_at(horizon); }
};

// A maximal stretch of constant regime, clipped to the horizon.
struct Segment {
  std::size_t index = 0;
  double start_time = 0.0;
  State state = State::Up;
  double start_price = 0.0;
  double duration = 0.0;
};

// Walks the segments of a fresh path, stopping early when `visit` returns false.
template <class Visitor>
void walk_segments(const ModelParams& p, double x0, State i0, double horizon, Rng& rng, Visitor&& visit) {
  double t = 0.0;
  double price = x0;
  State s = i0;
  for (std::size_t k = 0; t < horizon; ++k) {
    std::exponential_distribution<double> hold(p.jump_rate(s));
    const double h = hold(rng);
    const double d = std::min(h, horizon - t);
    if (!visit(Segment{k, t, s, price, d})) return;
    price *= std::exp(p.rate(s) * d);
    t += d;
    s = other(s);
  }
}

ChainPath simulate_path(const ModelParams& params, double x0, State i0, double horizon, std::uint64_t seed);
// Initial state drawn from the stationary distribution.
ChainPath simulate_path(const ModelParams& params, double x0, double horizon, std::uint64_t seed);

std::vector<Segment> segments(const ChainPath& path);

// Prices at t = 0, delta, 2 delta, ... up to the horizon (daily closes of a path).
std::vector<double> sample_prices(const ChainPath& path, double delta);

// A stopping rule that decides, one segment at a time, when to sell.
class StoppingPolicy {
 public:
  virtual ~StoppingPolicy() = default;
  // Offset into the segment at which to sell, or nullopt to keep holding.
  virtual std::optional<double> exit_offset(const Segment& seg, const ModelParams& params) const = 0;
};

// tau* = first exit of (S_t, alpha_t) from the continuation region of `rule`.
class ThresholdPolicy final : public StoppingPolicy {
 public:
  explicit ThresholdPolicy(const SellingRule& rule);
  std::optional<double> exit_offset(const Segment& seg, const ModelParams& params) const override;

 private:
  Regime regime_;
  double x_star_;
  double x0_star_;
};

// Sells at the first instant the chain is in the downtick state.
class SellOnDowntick final : public StoppingPolicy {
 public:
  std::optional<double> exit_offset(const Segment& seg, const ModelParams& params) const override;
};

// Sells the first time the price reaches `level`, whatever the regime.
class SellAtLevel final : public StoppingPolicy {
 public:
  explicit SellAtLevel(double level) : level_(level) {}
  std::optional<double> exit_offset(const Segment& seg, const ModelParams& params) const override;

 private:
  double level_;
};

struct StopOutcome {
  std::optional<double> tau;  // nullopt: not stopped before the horizon
  double price = 0.0;         // S_tau when stopped
  double payoff = 0.0;        // e^{-rho tau}(S_tau - K), or 0 when unstopped
};

StopOutcome apply_policy(const ChainPath& path, const StoppingPolicy& policy);
// Throws std::invalid_argument if the rule was solved for other parameters.
StopOutcome apply_rule(const ChainPath& path, const SellingRule& rule);

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n_paths = 0;
  std::size_t n_unstopped = 0;
};

// Horizon T with exp(-(rho - mu) T) = 1e-6; beyond it the discounted payoff is negligible.
double default_horizon(const ModelParams& params);

McEstimate mc_value(const ModelParams& params, const StoppingPolicy& policy, double x0, State i0,
                    std::size_t n_paths, double horizon, std::uint64_t seed);
McEstimate mc_value(const ModelParams& params, const SellingRule& rule, double x0, State i0,
                    std::size_t n_paths, double horizon, std::uint64_t seed);

// Sum in a fixed binary tree, independent of how the terms were produced.
double pairwise_sum(std::span<const double> terms);

struct GbmLimitRow {
  double epsilon = 0.0;
  bool admissible = false;  // scaled params satisfy (A1), (A2) and Case I
  double beta2 = 0.0;
  double x_star = 0.0;
  double beta0 = 0.0;
  double x0 = 0.0;  // K beta0 / (beta0 - 1)
};

// Scales f1 = mu + sigma/sqrt(eps), f2 = mu - sigma/sqrt(eps), lambda1 = lambda2 = 1/eps
// and compares the Markov-chain threshold with its geometric Brownian motion limit.
std::vector<GbmLimitRow> gbm_limit_study(double mu, double sigma, double rho, double K,
                                         const std::vector<double>& epsilons);

ModelParams gbm_scaled_params(double mu, double sigma, double rho, double K, double epsilon);
double gbm_limit_root(double mu, double sigma, double rho);

}  // namespace mcsell

#endif  // MCSELL_SIMULATOR_HPP
