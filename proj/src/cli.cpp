#include "mcsell/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mcsell/backtest.hpp"
#include "mcsell/calibration.hpp"
#include "mcsell/io.hpp"
#include "mcsell/model.hpp"
#include "mcsell/simulator.hpp"
#include "mcsell/solver.hpp"
#include "mcsell/verifier.hpp"

namespace mcsell {
namespace {

constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

// Model parameters from --params FILE, overridden by individual flags.
struct ParamFlags {
  std::string file;
  double f1 = kUnset, f2 = kUnset, lambda1 = kUnset, lambda2 = kUnset, rho = kUnset, cost = kUnset;

  void attach(CLI::App* sub) {
    sub->add_option("--params", file, "model parameters JSON (a rule JSON also works), '-' for stdin");
    sub->add_option("--f1", f1, "return rate in the up state");
    sub->add_option("--f2", f2, "return rate in the down state");
    sub->add_option("--lambda1", lambda1, "jump rate out of the up state");
    sub->add_option("--lambda2", lambda2, "jump rate out of the down state");
    sub->add_option("--rho", rho, "discount rate");
    sub->add_option("--cost", cost, "transaction cost K");
  }
};

json parse_json(std::istream& is, const std::string& what) {
  try {
    return json::parse(is);
  } catch (const json::parse_error& e) {
    throw FormatError(what + " is not valid JSON: " + e.what());
  }
}

json read_json_source(const std::string& path, std::istream& in) {
  if (path == "-") return parse_json(in, "stdin");
  std::ifstream f(path);
  if (!f) throw FormatError("cannot open '" + path + "'");
  return parse_json(f, "'" + path + "'");
}

PriceSeries read_prices(const std::string& path, std::istream& in, double delta) {
  if (path == "-") return read_price_csv(in, delta);
  return read_price_csv_file(path, delta);
}

ModelParams resolve_params(const ParamFlags& pf, std::istream& in) {
  ModelParams p{kUnset, kUnset, kUnset, kUnset, kUnset, kUnset};
  if (!pf.file.empty()) {
    json j = read_json_source(pf.file, in);
    if (j.is_object() && j.contains("regime") && j.contains("params")) j = j.at("params");
    if (!j.is_object()) throw FormatError("parameter file must hold a JSON object");
    const auto take = [&](const char* key, double& slot) {
      if (!j.contains(key)) return;
      if (!j.at(key).is_number()) throw FormatError(std::string("key '") + key + "' must be a number");
      slot = j.at(key).get<double>();
    };
    take("f1", p.f1);
    take("f2", p.f2);
    take("lambda1", p.lambda1);
    take("lambda2", p.lambda2);
    take("rho", p.rho);
    take("K", p.K);
  }
  const auto over = [](double flag, double& slot) {
    if (!std::isnan(flag)) slot = flag;
  };
  over(pf.f1, p.f1);
  over(pf.f2, p.f2);
  over(pf.lambda1, p.lambda1);
  over(pf.lambda2, p.lambda2);
  over(pf.rho, p.rho);
  over(pf.cost, p.K);

  const std::pair<const char*, double> fields[] = {{"f1", p.f1},           {"f2", p.f2},   {"lambda1", p.lambda1},
                                                   {"lambda2", p.lambda2}, {"rho", p.rho}, {"cost", p.K}};
  for (const auto& [name, v] : fields)
    if (std::isnan(v))
      throw FormatError(std::string("missing parameter '") + name + "' (give --params FILE or --" + name + ")");
  check_well_formed(p);
  return p;
}

// Prints the violations and returns true when the rule cannot be solved.
bool report_violations(const ModelParams& p, std::ostream& err) {
  const auto violations = validate(p);
  for (const auto& v : violations) {
    err << "error: assumption violated: " << v.message;
    if (v.assumption == Assumption::Discounting) {
      const double ph = phi(p);
      if (ph < 0.0) err << " (Phi(rho) < 0)";
      err << "; selling is never optimal";
    }
    err << '\n';
  }
  return !violations.empty();
}

GridSpec parse_grid(const std::string& text, bool log_spaced) {
  GridSpec g;
  g.log_spaced = log_spaced;
  std::istringstream is(text);
  std::string a, b, c;
  if (!std::getline(is, a, ':') || !std::getline(is, b, ':') || !std::getline(is, c) || a.empty() || b.empty() ||
      c.empty())
    throw FormatError("grid must look like MIN:MAX:N, got '" + text + "'");
  try {
    std::size_t pos = 0;
    g.x_min = std::stod(a, &pos);
    if (pos != a.size()) throw std::invalid_argument(a);
    g.x_max = std::stod(b, &pos);
    if (pos != b.size()) throw std::invalid_argument(b);
    const long n = std::stol(c, &pos);
    if (pos != c.size() || n < 2) throw std::invalid_argument(c);
    g.n = static_cast<std::size_t>(n);
  } catch (const std::exception&) {
    throw FormatError("grid must look like MIN:MAX:N with N >= 2, got '" + text + "'");
  }
  if (!(g.x_min > 0.0) || !(g.x_max > g.x_min)) throw FormatError("grid needs 0 < MIN < MAX");
  return g;
}

bool parse_spacing(const std::string& s) {
  if (s == "log") return true;
  if (s == "linear") return false;
  throw FormatError("spacing must be 'log' or 'linear'");
}

template <class Writer>
void emit(const std::string& path, std::ostream& out, Writer&& write) {
  if (path.empty() || path == "-") {
    write(out);
    return;
  }
  std::ofstream f(path);
  if (!f) throw FormatError("cannot write '" + path + "'");
  write(f);
  if (!f) throw FormatError("write to '" + path + "' failed");
}

void emit_json(const std::string& path, std::ostream& out, const json& j) {
  emit(path, out, [&](std::ostream& os) {
    write_json(os, j);
    os << '\n';
  });
}

std::string fmt(double v) { return format_number(v); }

}  // namespace

int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Optimal selling rule for a two-state Markov-modulated asset price"};
  app.name("mcsell");
  app.require_subcommand(1, 1);
  app.fallthrough();
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "print a short summary on stderr");

  std::string out_path;
  const auto add_out = [&](CLI::App* sub) { sub->add_option("--out", out_path, "output file (default stdout)"); };

  // solve
  ParamFlags solve_pf;
  auto* solve_cmd = app.add_subcommand("solve", "params JSON -> selling rule JSON");
  solve_pf.attach(solve_cmd);
  add_out(solve_cmd);

  // verify
  ParamFlags verify_pf;
  std::string verify_rule, verify_grid, verify_spacing = "log";
  double verify_rel = Tolerances{}.rel;
  auto* verify_cmd = app.add_subcommand("verify", "rule JSON or params -> verification report JSON (exit 1 on failure)");
  verify_pf.attach(verify_cmd);
  verify_cmd->add_option("--rule", verify_rule, "selling rule JSON from `solve`, '-' for stdin");
  verify_cmd->add_option("--grid", verify_grid, "price grid MIN:MAX:N");
  verify_cmd->add_option("--spacing", verify_spacing, "grid spacing, log or linear")->capture_default_str();
  verify_cmd->add_option("--tol", verify_rel, "relative residual tolerance")->capture_default_str();
  add_out(verify_cmd);

  // value
  ParamFlags value_pf;
  std::string value_grid, value_spacing = "linear";
  auto* value_cmd = app.add_subcommand("value", "params + grid -> CSV of x, v(x,1), v(x,2)");
  value_pf.attach(value_cmd);
  value_cmd->add_option("--grid", value_grid, "price grid MIN:MAX:N (default spans the thresholds)");
  value_cmd->add_option("--spacing", value_spacing, "grid spacing, log or linear")->capture_default_str();
  add_out(value_cmd);

  // simulate
  ParamFlags sim_pf;
  double sim_x0 = kUnset, sim_horizon = 10.0;
  int sim_state = 0;
  std::uint64_t sim_seed = 1;
  auto* sim_cmd = app.add_subcommand("simulate", "params -> price path CSV (t, state, price)");
  sim_pf.attach(sim_cmd);
  sim_cmd->add_option("--x0", sim_x0, "initial price (default: the cost K)");
  sim_cmd->add_option("--state", sim_state, "initial state 1 or 2 (default: stationary draw)")
      ->check(CLI::IsMember({0, 1, 2}));
  sim_cmd->add_option("--horizon", sim_horizon, "path length in years")->capture_default_str();
  sim_cmd->add_option("--seed", sim_seed, "random seed")->capture_default_str();
  add_out(sim_cmd);

  // mc-value
  ParamFlags mc_pf;
  double mc_x0 = kUnset, mc_horizon = kUnset;
  int mc_state = 1;
  std::size_t mc_paths = 100000;
  std::uint64_t mc_seed = 1;
  std::string mc_policy = "rule";
  auto* mc_cmd = app.add_subcommand("mc-value", "Monte Carlo estimate of the discounted payoff of a selling policy");
  mc_pf.attach(mc_cmd);
  mc_cmd->add_option("--x0", mc_x0, "initial price")->required();
  mc_cmd->add_option("--state", mc_state, "initial state 1 or 2")->check(CLI::IsMember({1, 2}))->capture_default_str();
  mc_cmd->add_option("--paths", mc_paths, "number of paths")->capture_default_str();
  mc_cmd->add_option("--seed", mc_seed, "random seed")->capture_default_str();
  mc_cmd->add_option("--horizon", mc_horizon, "truncation horizon (default: discount factor 1e-6)");
  mc_cmd->add_option("--policy", mc_policy, "rule | downtick | level=X")->capture_default_str();
  add_out(mc_cmd);

  // gbm-limit
  double gbm_mu = 0.2, gbm_sigma = 0.3, gbm_rho = 0.5, gbm_cost = 1.0;
  std::vector<double> gbm_eps{0.1, 0.01, 0.001};
  auto* gbm_cmd = app.add_subcommand("gbm-limit", "convergence table of the scaled chain towards its GBM limit");
  gbm_cmd->add_option("--mu", gbm_mu, "GBM drift")->capture_default_str();
  gbm_cmd->add_option("--sigma", gbm_sigma, "GBM volatility")->capture_default_str();
  gbm_cmd->add_option("--rho", gbm_rho, "discount rate")->capture_default_str();
  gbm_cmd->add_option("--cost", gbm_cost, "transaction cost K")->capture_default_str();
  gbm_cmd->add_option("--eps", gbm_eps, "scaling parameters")->delimiter(',');
  add_out(gbm_cmd);

  // calibrate
  std::string cal_prices;
  double cal_rho = 0.03, cal_delta = 1.0 / kTradingDaysPerYear;
  auto* cal_cmd = app.add_subcommand("calibrate", "prices CSV -> calibration JSON");
  cal_cmd->add_option("--prices", cal_prices, "CSV with date,close columns, '-' for stdin")->required();
  cal_cmd->add_option("--rho", cal_rho, "discount rate used for Phi(rho)")->capture_default_str();
  cal_cmd->add_option("--delta", cal_delta, "sampling step in years")->capture_default_str();
  add_out(cal_cmd);

  // backtest
  std::string bt_prices, bt_table;
  BacktestConfig bt_cfg;
  double bt_delta = 1.0 / kTradingDaysPerYear;
  auto* bt_cmd = app.add_subcommand("backtest", "prices CSV -> rolling-window decision report JSON");
  bt_cmd->add_option("--prices", bt_prices, "CSV with date,close columns, '-' for stdin")->required();
  bt_cmd->add_option("--window", bt_cfg.window_len, "window length in trading days")->capture_default_str();
  bt_cmd->add_option("--rho", bt_cfg.rho, "discount rate")->capture_default_str();
  bt_cmd->add_option("--cost", bt_cfg.K, "transaction cost K")->capture_default_str();
  bt_cmd->add_option("--delta", bt_delta, "sampling step in years")->capture_default_str();
  bt_cmd->add_option("--table", bt_table, "also write per-window rows as CSV");
  add_out(bt_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "error: " << e.what() << '\n';
    return kExitBadInput;
  }

  try {
    if (solve_cmd->parsed()) {
      const auto p = resolve_params(solve_pf, in);
      if (report_violations(p, err)) return kExitAssumption;
      const auto rule = solve(p);
      emit_json(out_path, out, json(rule));
      if (verbose) {
        err << to_string(rule.regime) << ": x* = " << fmt(rule.x_star);
        if (rule.x0_star) err << ", x0* = " << fmt(*rule.x0_star) << ", X0 = " << fmt(*rule.X0);
        err << '\n';
      }
      for (const auto& d : rule.diagnostics) err << "note: " << d.code << ": " << d.message << '\n';
      return kExitOk;
    }

    if (verify_cmd->parsed()) {
      SellingRule rule;
      if (!verify_rule.empty()) {
        const json j = read_json_source(verify_rule, in);
        if (!j.is_object() || !j.contains("regime")) throw FormatError("--rule expects the JSON written by `solve`");
        rule = j.get<SellingRule>();
      } else {
        const auto p = resolve_params(verify_pf, in);
        if (report_violations(p, err)) return kExitAssumption;
        rule = solve(p);
      }
      if (rule.regime == Regime::NeverSell) {
        err << "error: the rule is in the never-sell regime; there is nothing to verify\n";
        return kExitAssumption;
      }
      Tolerances tol;
      tol.rel = verify_rel;
      const GridSpec grid =
          verify_grid.empty() ? default_grid(rule) : parse_grid(verify_grid, parse_spacing(verify_spacing));
      const auto report = verify(rule, grid, tol);
      emit_json(out_path, out, json(report));
      if (!report.passed)
        for (const auto& f : report.failures()) err << "failed: " << f << '\n';
      if (verbose) err << (report.passed ? "passed" : "FAILED") << ", max HJB residual " << fmt(report.residual_max) << '\n';
      return report.passed ? kExitOk : kExitVerifyFailed;
    }

    if (value_cmd->parsed()) {
      const auto p = resolve_params(value_pf, in);
      if (report_violations(p, err)) return kExitAssumption;
      const auto rule = solve(p);
      GridSpec grid;
      if (value_grid.empty()) {
        grid = default_grid(rule, 201);
        grid.log_spaced = parse_spacing(value_spacing);
      } else {
        grid = parse_grid(value_grid, parse_spacing(value_spacing));
      }
      emit(out_path, out, [&](std::ostream& os) { write_value_csv(os, rule, grid.points()); });
      return kExitOk;
    }

    if (sim_cmd->parsed()) {
      const auto p = resolve_params(sim_pf, in);
      const double x0 = std::isnan(sim_x0) ? p.K : sim_x0;
      const auto path = sim_state == 0 ? simulate_path(p, x0, sim_horizon, sim_seed)
                                       : simulate_path(p, x0, state_from_index(sim_state), sim_horizon, sim_seed);
      emit(out_path, out, [&](std::ostream& os) { write_path_csv(os, path); });
      if (verbose) err << path.events.size() << " jumps, terminal price " << fmt(path.terminal_price()) << '\n';
      return kExitOk;
    }

    if (mc_cmd->parsed()) {
      const auto p = resolve_params(mc_pf, in);
      if (report_violations(p, err)) return kExitAssumption;
      const auto rule = solve(p);
      const State i0 = state_from_index(mc_state);
      const double horizon = std::isnan(mc_horizon) ? default_horizon(p) : mc_horizon;
      McEstimate est;
      if (mc_policy == "rule") {
        est = mc_value(p, rule, mc_x0, i0, mc_paths, horizon, mc_seed);
      } else if (mc_policy == "downtick") {
        est = mc_value(p, SellOnDowntick{}, mc_x0, i0, mc_paths, horizon, mc_seed);
      } else if (mc_policy.rfind("level=", 0) == 0) {
        double level = 0.0;
        try {
          level = std::stod(mc_policy.substr(6));
        } catch (const std::exception&) {
          throw FormatError("bad policy level in '" + mc_policy + "'");
        }
        est = mc_value(p, SellAtLevel{level}, mc_x0, i0, mc_paths, horizon, mc_seed);
      } else {
        throw FormatError("policy must be rule, downtick or level=X");
      }
      const double v = value(rule, mc_x0, i0);
      json j{{"x0", round_significant(mc_x0)},
             {"state", mc_state},
             {"policy", mc_policy},
             {"horizon", round_significant(horizon)},
             {"seed", mc_seed},
             {"estimate", est},
             {"value", round_significant(v)}};
      j["z_score"] = est.std_error > 0.0 ? json(round_significant((est.mean - v) / est.std_error)) : json(nullptr);
      emit_json(out_path, out, j);
      return kExitOk;
    }

    if (gbm_cmd->parsed()) {
      const auto rows = gbm_limit_study(gbm_mu, gbm_sigma, gbm_rho, gbm_cost, gbm_eps);
      emit(out_path, out, [&](std::ostream& os) { write_gbm_csv(os, rows); });
      return kExitOk;
    }

    if (cal_cmd->parsed()) {
      const auto series = read_prices(cal_prices, in, cal_delta);
      const auto result = calibrate(series, cal_rho);
      emit_json(out_path, out, json(result));
      if (verbose) err << "Phi(" << fmt(cal_rho) << ") = " << fmt(result.phi_rho) << '\n';
      return kExitOk;
    }

    if (bt_cmd->parsed()) {
      const auto series = read_prices(bt_prices, in, bt_delta);
      const auto report = run_backtest(series, bt_cfg);
      emit_json(out_path, out, json(report));
      if (!bt_table.empty()) {
        std::ofstream f(bt_table);
        if (!f) throw FormatError("cannot write '" + bt_table + "'");
        write_window_csv(f, report);
      }
      if (verbose) {
        if (report.executed_sale)
          err << "sold on " << report.executed_sale->date << " at " << fmt(report.executed_sale->price) << '\n';
        else
          err << "no sale\n";
      }
      return kExitOk;
    }
  } catch (const AssumptionError& e) {
    err << "error: " << e.what() << '\n';
    return kExitAssumption;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const CalibrationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitInternal;
}

}  // namespace mcsell
