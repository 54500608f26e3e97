#include "mcsell/simulator.hpp"

#include <limits>
#include <stdexcept>
#include <thread>

namespace mcsell {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

Rng make_stream(std::uint64_t master_seed, std::uint64_t stream) {
  return Rng(splitmix64(splitmix64(master_seed) ^ splitmix64(stream ^ 0x5851f42d4c957f2dULL)));
}

State sample_stationary_state(const ModelParams& p, Rng& rng) {
  std::bernoulli_distribution up(p.lambda2 / (p.lambda1 + p.lambda2));
  return up(rng) ? State::Up : State::Down;
}

namespace {

// Last event at or before t, or nullptr.
const JumpEvent* last_event(const std::vector<JumpEvent>& events, double t) {
  const auto it = std::upper_bound(events.begin(), events.end(), t,
                                   [](double v, const JumpEvent& e) { return v < e.time; });
  return it == events.begin() ? nullptr : &*(it - 1);
}

}  // namespace

State ChainPath::state_at(double t) const {
  const auto* e = last_event(events, t);
  return e ? e->new_state : initial_state;
}

double ChainPath::price_at(double t) const {
  const auto* e = last_event(events, t);
  if (!e) return initial_price * std::exp(params.rate(initial_state) * t);
  return e->price * std::exp(params.rate(e->new_state) * (t - e->time));
}

std::vector<double> sample_prices(const ChainPath& path, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("sampling step must be positive");
  const auto n = static_cast<std::size_t>(std::floor(path.horizon / delta * (1.0 + 1e-12))) + 1;
  std::vector<double> out;
  out.reserve(n);
  std::size_t j = 0;  // events[0, j) are at or before t
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * delta;
    while (j < path.events.size() && path.events[j].time <= t) ++j;
    if (j == 0)
      out.push_back(path.initial_price * std::exp(path.params.rate(path.initial_state) * t));
    else
      out.push_back(path.events[j - 1].price * std::exp(path.params.rate(path.events[j - 1].new_state) *
                                                        (t - path.events[j - 1].time)));
  }
  return out;
}

namespace {

void require_path_inputs(double x0, double horizon) {
  if (!(x0 > 0.0)) throw std::invalid_argument("initial price must be positive");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw std::invalid_argument("horizon must be positive and finite");
}

ChainPath record_path(const ModelParams& p, double x0, State i0, double horizon, Rng& rng) {
  ChainPath path;
  path.params = p;
  path.initial_state = i0;
  path.initial_price = x0;
  path.horizon = horizon;
  walk_segments(p, x0, i0, horizon, rng, [&](const Segment& seg) {
    const double end = seg.start_time + seg.duration;
    if (end < horizon)
      path.events.push_back({end, other(seg.state), seg.start_price * std::exp(p.rate(seg.state) * seg.duration)});
    return true;
  });
  return path;
}

}  // namespace

ChainPath simulate_path(const ModelParams& p, double x0, State i0, double horizon, std::uint64_t seed) {
  check_well_formed(p);
  require_path_inputs(x0, horizon);
  Rng rng = make_stream(seed, 0);
  return record_path(p, x0, i0, horizon, rng);
}

ChainPath simulate_path(const ModelParams& p, double x0, double horizon, std::uint64_t seed) {
  check_well_formed(p);
  require_path_inputs(x0, horizon);
  Rng rng = make_stream(seed, 0);
  const State i0 = sample_stationary_state(p, rng);
  return record_path(p, x0, i0, horizon, rng);
}

std::vector<Segment> segments(const ChainPath& path) {
  std::vector<Segment> out;
  out.reserve(path.events.size() + 1);
  double t = 0.0;
  double price = path.initial_price;
  State s = path.initial_state;
  for (const auto& e : path.events) {
    out.push_back({out.size(), t, s, price, e.time - t});
    t = e.time;
    price = e.price;
    s = e.new_state;
  }
  out.push_back({out.size(), t, s, price, path.horizon - t});
  return out;
}

ThresholdPolicy::ThresholdPolicy(const SellingRule& rule)
    : regime_(rule.regime), x_star_(rule.x_star), x0_star_(rule.x0_star.value_or(0.0)) {}

std::optional<double> ThresholdPolicy::exit_offset(const Segment& seg, const ModelParams& p) const {
  if (regime_ == Regime::NeverSell) return std::nullopt;
  if (seg.state == State::Down) {
    // The price only decays while in the downtick state.
    if (seg.start_price >= x_star_) return 0.0;
    return std::nullopt;
  }
  if (regime_ == Regime::CaseI) return std::nullopt;
  if (seg.start_price >= x0_star_) return 0.0;
  const double t = std::log(x0_star_ / seg.start_price) / p.f1;
  if (t <= seg.duration) return t;
  return std::nullopt;
}

std::optional<double> SellOnDowntick::exit_offset(const Segment& seg, const ModelParams&) const {
  if (seg.state == State::Down) return 0.0;
  return std::nullopt;
}

std::optional<double> SellAtLevel::exit_offset(const Segment& seg, const ModelParams& p) const {
  if (seg.start_price >= level_) return 0.0;
  const double f = p.rate(seg.state);
  if (f <= 0.0) return std::nullopt;
  const double t = std::log(level_ / seg.start_price) / f;
  if (t <= seg.duration) return t;
  return std::nullopt;
}

namespace {

StopOutcome stop_at(const ModelParams& p, const Segment& seg, double offset) {
  StopOutcome out;
  out.tau = seg.start_time + offset;
  out.price = seg.start_price * std::exp(p.rate(seg.state) * offset);
  out.payoff = std::exp(-p.rho * *out.tau) * (out.price - p.K);
  return out;
}

}  // namespace

StopOutcome apply_policy(const ChainPath& path, const StoppingPolicy& policy) {
  for (const auto& seg : segments(path)) {
    if (const auto off = policy.exit_offset(seg, path.params)) return stop_at(path.params, seg, *off);
  }
  return {};
}

StopOutcome apply_rule(const ChainPath& path, const SellingRule& rule) {
  if (!(path.params == rule.params))
    throw std::invalid_argument("selling rule was solved for different model parameters");
  return apply_policy(path, ThresholdPolicy(rule));
}

double default_horizon(const ModelParams& p) {
  const double mu = derive(p).mu;
  if (!(p.rho > mu)) throw AssumptionError("default horizon needs rho > mu");
  return std::log(1e6) / (p.rho - mu);
}

double pairwise_sum(std::span<const double> terms) {
  if (terms.size() <= 8) {
    double s = 0.0;
    for (double t : terms) s += t;
    return s;
  }
  const std::size_t half = terms.size() / 2;
  return pairwise_sum(terms.first(half)) + pairwise_sum(terms.subspan(half));
}

McEstimate mc_value(const ModelParams& p, const StoppingPolicy& policy, double x0, State i0,
                    std::size_t n_paths, double horizon, std::uint64_t seed) {
  check_well_formed(p);
  require_path_inputs(x0, horizon);
  if (n_paths < 2) throw std::invalid_argument("need at least two paths");

  std::vector<double> payoff(n_paths, 0.0);
  std::vector<unsigned char> stopped(n_paths, 0);
  auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      Rng rng = make_stream(seed, k);
      walk_segments(p, x0, i0, horizon, rng, [&](const Segment& seg) {
        if (const auto off = policy.exit_offset(seg, p)) {
          payoff[k] = stop_at(p, seg, *off).payoff;
          stopped[k] = 1;
          return false;
        }
        return true;
      });
    }
  };

  const std::size_t n_threads =
      std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), n_paths / 1024));
  if (n_threads == 1) {
    run(0, n_paths);
  } else {
    std::vector<std::jthread> workers;
    const std::size_t chunk = (n_paths + n_threads - 1) / n_threads;
    for (std::size_t b = 0; b < n_paths; b += chunk) workers.emplace_back(run, b, std::min(n_paths, b + chunk));
  }

  // Shift by the first payoff so identical payoffs give an exact mean and zero spread.
  const double base = payoff[0];
  std::vector<double> work(n_paths);
  for (std::size_t k = 0; k < n_paths; ++k) work[k] = payoff[k] - base;
  const double mean = base + pairwise_sum(work) / static_cast<double>(n_paths);
  for (std::size_t k = 0; k < n_paths; ++k) {
    const double dev = payoff[k] - mean;
    work[k] = dev * dev;
  }
  const double var = pairwise_sum(work) / static_cast<double>(n_paths - 1);

  McEstimate est;
  est.mean = mean;
  est.std_error = std::sqrt(var / static_cast<double>(n_paths));
  est.n_paths = n_paths;
  for (auto s : stopped) est.n_unstopped += s ? 0 : 1;
  return est;
}

McEstimate mc_value(const ModelParams& p, const SellingRule& rule, double x0, State i0, std::size_t n_paths,
                    double horizon, std::uint64_t seed) {
  if (!(p == rule.params)) throw std::invalid_argument("selling rule was solved for different model parameters");
  return mc_value(p, ThresholdPolicy(rule), x0, i0, n_paths, horizon, seed);
}

ModelParams gbm_scaled_params(double mu, double sigma, double rho, double K, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  const double jitter = sigma / std::sqrt(epsilon);
  return {mu + jitter, mu - jitter, 1.0 / epsilon, 1.0 / epsilon, rho, K};
}

double gbm_limit_root(double mu, double sigma, double rho) {
  const double s2 = sigma * sigma;
  return (-mu + std::sqrt(mu * mu + 2.0 * rho * s2)) / s2;
}

std::vector<GbmLimitRow> gbm_limit_study(double mu, double sigma, double rho, double K,
                                         const std::vector<double>& epsilons) {
  if (!(rho > 0.0) || !(sigma > 0.0) || !(K > 0.0))
    throw std::invalid_argument("gbm limit study needs rho > 0, sigma > 0 and K > 0");
  const double beta0 = gbm_limit_root(mu, sigma, rho);
  const double x0 = K * beta0 / (beta0 - 1.0);
  std::vector<GbmLimitRow> rows;
  for (double eps : epsilons) {
    GbmLimitRow row;
    row.epsilon = eps;
    row.beta0 = beta0;
    row.x0 = x0;
    const auto p = gbm_scaled_params(mu, sigma, rho, K, eps);
    row.admissible = validate(p).empty() && p.rho <= p.f1;
    if (row.admissible) {
      const auto rule = solve(p);
      row.beta2 = rule.derived.beta2;
      row.x_star = rule.x_star;
    } else {
      row.beta2 = row.x_star = std::numeric_limits<double>::quiet_NaN();
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace mcsell
