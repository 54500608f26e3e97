#include "mcsell/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace mcsell {

double round_significant(double v, int digits) {
  if (!std::isfinite(v)) return v;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return std::strtod(buf, nullptr);
}

std::string format_number(double v, int digits) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

namespace {

json num(double v) {
  if (!std::isfinite(v)) return nullptr;
  return round_significant(v);
}

double get_number(const json& j, const char* key) {
  if (!j.contains(key)) throw FormatError(std::string("missing key '") + key + "'");
  const auto& v = j.at(key);
  if (!v.is_number()) throw FormatError(std::string("key '") + key + "' must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw FormatError(std::string("key '") + key + "' must be finite");
  return d;
}

std::optional<double> get_optional(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return get_number(j, key);
}

}  // namespace

namespace {

void write_json_at(std::ostream& out, const json& j, int indent, int depth) {
  const auto newline = [&](int d) {
    if (indent < 0) return;
    out << '\n' << std::string(static_cast<std::size_t>(indent * d), ' ');
  };
  if (j.is_object() || j.is_array()) {
    const bool obj = j.is_object();
    if (j.empty()) {
      out << (obj ? "{}" : "[]");
      return;
    }
    out << (obj ? '{' : '[');
    bool first = true;
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!first) out << ',';
      first = false;
      newline(depth + 1);
      if (obj) out << json(it.key()).dump() << (indent < 0 ? ":" : ": ");
      write_json_at(out, it.value(), indent, depth + 1);
    }
    newline(depth);
    out << (obj ? '}' : ']');
  } else if (j.is_number_float()) {
    const double v = j.get<double>();
    if (!std::isfinite(v)) {
      out << "null";
      return;
    }
    std::string s = format_number(v);
    // keep floats recognisable as floats
    if (s.find_first_of(".eE") == std::string::npos) s += ".0";
    out << s;
  } else {
    out << j.dump();
  }
}

}  // namespace

void write_json(std::ostream& out, const json& j, int indent) { write_json_at(out, j, indent, 0); }

std::string dump_json(const json& j, int indent) {
  std::ostringstream os;
  write_json(os, j, indent);
  return os.str();
}

void to_json(json& j, const ModelParams& p) {
  j = json{{"f1", num(p.f1)},   {"f2", num(p.f2)},   {"lambda1", num(p.lambda1)},
           {"lambda2", num(p.lambda2)}, {"rho", num(p.rho)}, {"K", num(p.K)}};
}

void from_json(const json& j, ModelParams& p) {
  if (!j.is_object()) throw FormatError("model parameters must be a JSON object");
  p.f1 = get_number(j, "f1");
  p.f2 = get_number(j, "f2");
  p.lambda1 = get_number(j, "lambda1");
  p.lambda2 = get_number(j, "lambda2");
  p.rho = get_number(j, "rho");
  p.K = get_number(j, "K");
}

void to_json(json& j, const DerivedQuantities& d) {
  j = json{{"phi_rho", num(d.phi_rho)}, {"rho_crit", num(d.rho_crit)}, {"nu1", num(d.nu1)},
           {"nu2", num(d.nu2)},         {"mu", num(d.mu)},             {"d1", num(d.d1)},
           {"d2", num(d.d2)},           {"beta1", num(d.beta1)},       {"beta2", num(d.beta2)},
           {"gamma1", num(d.gamma1)},   {"kappa2", num(d.kappa2)},     {"a0", num(d.a0)},
           {"b0", num(d.b0)}};
}

void to_json(json& j, const Diagnostic& d) {
  json values = json::object();
  for (const auto& [k, v] : d.values) values[k] = num(v);
  j = json{{"code", d.code}, {"message", d.message}, {"values", values}};
}

void to_json(json& j, const SellingRule& r) {
  j = json::object();
  j["regime"] = to_string(r.regime);
  j["params"] = r.params;
  if (r.regime != Regime::NeverSell) {
    j["x_star"] = num(r.x_star);
    j["A2"] = num(r.a2());
    j["log_A2"] = num(r.log_a2());
    j["A2_anchor"] = num(r.a2_anchor);
  }
  if (r.regime == Regime::CaseII) {
    j["x0_star"] = num(*r.x0_star);
    j["C1"] = num(*r.c1());
    j["log_C1"] = num(*r.log_c1());
    j["C1_anchor"] = num(*r.c1_anchor);
    j["X0"] = num(*r.X0);
  }
  j["derived"] = r.derived;
  j["diagnostics"] = r.diagnostics;
}

void from_json(const json& j, SellingRule& r) {
  if (!j.is_object()) throw FormatError("selling rule must be a JSON object");
  if (!j.contains("regime") || !j.at("regime").is_string()) throw FormatError("missing string key 'regime'");
  if (!j.contains("params")) throw FormatError("missing key 'params'");
  r = SellingRule{};
  try {
    r.regime = regime_from_string(j.at("regime").get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
  r.params = j.at("params").get<ModelParams>();
  r.derived = derive(r.params);
  if (j.contains("diagnostics") && j.at("diagnostics").is_array()) {
    for (const auto& d : j.at("diagnostics")) {
      Diagnostic diag;
      diag.code = d.value("code", "");
      diag.message = d.value("message", "");
      if (d.contains("values") && d.at("values").is_object())
        for (const auto& [k, v] : d.at("values").items())
          if (v.is_number()) diag.values[k] = v.get<double>();
      r.diagnostics.push_back(std::move(diag));
    }
  }
  if (r.regime == Regime::NeverSell) return;

  r.x_star = get_number(j, "x_star");
  if (const auto a = get_optional(j, "A2_anchor"))
    r.a2_anchor = *a;
  else if (const auto la = get_optional(j, "log_A2"))
    r.a2_anchor = std::exp(*la + r.derived.beta2 * std::log(r.x_star));
  else
    r.a2_anchor = get_number(j, "A2") * std::pow(r.x_star, r.derived.beta2);

  if (r.regime == Regime::CaseII) {
    r.x0_star = get_number(j, "x0_star");
    r.X0 = get_optional(j, "X0");
    if (const auto c = get_optional(j, "C1_anchor"))
      r.c1_anchor = *c;
    else if (const auto lc = get_optional(j, "log_C1"))
      r.c1_anchor = std::exp(*lc + r.derived.gamma1 * std::log(*r.x0_star));
    else
      r.c1_anchor = get_number(j, "C1") * std::pow(*r.x0_star, r.derived.gamma1);
  }
}

void to_json(json& j, const GridSpec& g) {
  j = json{{"x_min", num(g.x_min)}, {"x_max", num(g.x_max)}, {"n", g.n}, {"log_spaced", g.log_spaced}};
}

void to_json(json& j, const VerificationReport& r) {
  json residuals = json::array();
  for (const auto& c : r.residuals)
    residuals.push_back({{"name", c.name},
                         {"max_abs", num(c.max_abs)},
                         {"max_scaled", num(c.max_scaled)},
                         {"n_points", c.n_points},
                         {"passed", c.passed}});
  json margins = json::array();
  for (const auto& c : r.inequality_margins)
    margins.push_back({{"name", c.name},
                       {"min_slack", num(c.min_slack)},
                       {"min_scaled", num(c.min_scaled)},
                       {"n_points", c.n_points},
                       {"passed", c.passed}});
  json kinks = json::array();
  for (const auto& k : r.kink_report)
    kinks.push_back({{"name", k.name},
                     {"x", num(k.x)},
                     {"left_slope", num(k.left_slope)},
                     {"right_slope", num(k.right_slope)},
                     {"expectation", k.expectation},
                     {"tolerance", num(k.tolerance)},
                     {"passed", k.passed}});
  json lemmas = json::array();
  for (const auto& l : r.lemma_results)
    lemmas.push_back({{"name", l.name},
                      {"lhs", num(l.lhs)},
                      {"rhs", num(l.rhs)},
                      {"relation", l.relation},
                      {"passed", l.passed}});
  j = json{{"regime", to_string(r.regime)},
           {"grid_spec", r.grid},
           {"tolerances",
            {{"rel", r.tolerances.rel},
             {"abs_per_cost", r.tolerances.abs_per_cost},
             {"smooth_fit_rel", r.tolerances.smooth_fit_rel}}},
           {"residual_max", num(r.residual_max)},
           {"residuals", residuals},
           {"inequality_margins", margins},
           {"kink_report", kinks},
           {"lemma_results", lemmas},
           {"failures", r.failures()},
           {"passed", r.passed}};
}

void to_json(json& j, const McEstimate& e) {
  j = json{{"mean", num(e.mean)},
           {"std_error", num(e.std_error)},
           {"n_paths", e.n_paths},
           {"n_unstopped", e.n_unstopped}};
}

void to_json(json& j, const CalibrationResult& c) {
  j = json{{"f1", num(c.f1_hat)},
           {"f2", num(c.f2_hat)},
           {"lambda1", num(c.lambda1_hat)},
           {"lambda2", num(c.lambda2_hat)},
           {"Phi(rho)", num(c.phi_rho)},
           {"rho", num(c.rho)},
           {"mu_hat", num(c.mu_hat)},
           {"z_bar", num(c.z_bar)},
           {"sigma0", num(c.sigma0)},
           {"sigma1", num(c.sigma1)},
           {"sigma2", num(c.sigma2)},
           {"R", num(c.R)},
           {"R1", c.R1},
           {"R2", c.R2},
           {"n_up", c.n_up},
           {"n_down", c.n_down},
           {"span", num(c.span)},
           {"delta", num(c.delta)}};
}

void to_json(json& j, const BacktestReport& r) {
  json windows = json::array();
  for (const auto& w : r.windows) {
    json jw{{"period", w.label},
            {"first_index", w.first_index},
            {"last_index", w.last_index},
            {"decision", to_string(w.decision)}};
    if (w.calibration) jw["calibration"] = *w.calibration;
    if (!w.diagnostic.empty()) jw["diagnostic"] = w.diagnostic;
    windows.push_back(std::move(jw));
  }
  j = json{{"config", {{"window_len", r.config.window_len}, {"rho", num(r.config.rho)}, {"K", num(r.config.K)}}},
           {"windows", windows},
           {"notes", r.notes}};
  j["rule"] = r.rule ? json(*r.rule) : json(nullptr);
  if (r.executed_sale) {
    const auto& s = *r.executed_sale;
    json js{{"date", s.date},
            {"index", s.index},
            {"price", num(s.price)},
            {"inferred_state", index_of(s.inferred_state)},
            {"trigger_window", s.trigger_window},
            {"x_star", num(s.x_star)}};
    js["x0_star"] = s.x0_star ? num(*s.x0_star) : json(nullptr);
    j["executed_sale"] = js;
  } else {
    j["executed_sale"] = nullptr;
  }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r\"");
    const auto e = cell.find_last_not_of(" \t\r\"");
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  return out;
}

}  // namespace

PriceSeries read_price_csv(std::istream& in, double delta) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("price file is empty");
  const auto header = split_csv_line(line);
  std::ptrdiff_t date_col = -1, close_col = -1;
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (header[k] == "date") date_col = static_cast<std::ptrdiff_t>(k);
    if (header[k] == "close") close_col = static_cast<std::ptrdiff_t>(k);
  }
  if (date_col < 0 || close_col < 0) throw FormatError("price file header must name 'date' and 'close' columns");

  PriceSeries s;
  s.delta = delta;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv_line(line);
    const auto need = static_cast<std::size_t>(std::max(date_col, close_col));
    if (cells.size() <= need) throw FormatError("line " + std::to_string(line_no) + ": too few columns");
    const std::string& cell = cells[static_cast<std::size_t>(close_col)];
    char* end = nullptr;
    const double close = std::strtod(cell.c_str(), &end);
    if (cell.empty() || end != cell.c_str() + cell.size() || !std::isfinite(close))
      throw FormatError("line " + std::to_string(line_no) + ": close '" + cell + "' is not a number");
    s.timestamps.push_back(cells[static_cast<std::size_t>(date_col)]);
    s.closes.push_back(close);
  }
  return s;
}

PriceSeries read_price_csv_file(const std::string& path, double delta) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open price file '" + path + "'");
  return read_price_csv(in, delta);
}

void write_price_csv(std::ostream& out, const PriceSeries& s) {
  out << "date,close\n";
  for (std::size_t k = 0; k < s.size(); ++k) {
    const std::string date = s.timestamps.size() == s.size() ? s.timestamps[k] : std::to_string(k);
    out << date << ',' << format_number(s.closes[k]) << '\n';
  }
}

void write_value_csv(std::ostream& out, const SellingRule& rule, const std::vector<double>& xs) {
  out << "x,v1,v2\n";
  for (double x : xs)
    out << format_number(x) << ',' << format_number(value(rule, x, State::Up)) << ','
        << format_number(value(rule, x, State::Down)) << '\n';
}

void write_path_csv(std::ostream& out, const ChainPath& path) {
  out << "t,state,price\n";
  out << format_number(0.0) << ',' << index_of(path.initial_state) << ',' << format_number(path.initial_price)
      << '\n';
  for (const auto& e : path.events)
    out << format_number(e.time) << ',' << index_of(e.new_state) << ',' << format_number(e.price) << '\n';
  out << format_number(path.horizon) << ',' << index_of(path.state_at(path.horizon)) << ','
      << format_number(path.terminal_price()) << '\n';
}

void write_gbm_csv(std::ostream& out, const std::vector<GbmLimitRow>& rows) {
  out << "epsilon,beta2,x_star,beta0,x0,admissible\n";
  for (const auto& r : rows)
    out << format_number(r.epsilon) << ',' << format_number(r.beta2) << ',' << format_number(r.x_star) << ','
        << format_number(r.beta0) << ',' << format_number(r.x0) << ',' << (r.admissible ? 1 : 0) << '\n';
}

void write_window_csv(std::ostream& out, const BacktestReport& report) {
  out << "period,f1,f2,lambda1,lambda2,Phi(rho),decision\n";
  for (const auto& w : report.windows) {
    out << w.label;
    if (w.calibration) {
      const auto& c = *w.calibration;
      out << ',' << format_number(c.f1_hat) << ',' << format_number(c.f2_hat) << ','
          << format_number(c.lambda1_hat) << ',' << format_number(c.lambda2_hat) << ','
          << format_number(c.phi_rho);
    } else {
      out << ",,,,,";
    }
    out << ',' << to_string(w.decision) << '\n';
  }
}

}  // namespace mcsell
