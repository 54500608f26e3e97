#include "mcsell/backtest.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mcsell {

const char* to_string(Decision d) { return d == Decision::Hold ? "Hold" : "SellRegime"; }

namespace {

std::string label_of(const PriceSeries& s, std::size_t first, std::size_t last) {
  if (s.timestamps.size() != s.closes.size()) return std::to_string(first) + ".." + std::to_string(last);
  return s.timestamps[first] + ".." + s.timestamps[last];
}

State sign_state(double inc, State previous) {
  if (inc < 0.0) return State::Down;
  if (inc > 0.0) return State::Up;
  return previous;
}

// State inferred at the close of day `last`, from the latest nonzero increment.
State inferred_state_at(const PriceSeries& s, std::size_t first, std::size_t last) {
  for (std::size_t k = last; k > first; --k) {
    const double inc = std::log(s.closes[k] / s.closes[k - 1]);
    if (inc != 0.0) return sign_state(inc, State::Up);
  }
  return State::Up;
}

std::optional<ExecutedSale> scan_for_sale(const PriceSeries& s, const SellingRule& rule, std::size_t trigger,
                                          std::size_t window_first, std::size_t window_last) {
  State state = inferred_state_at(s, window_first, window_last);
  for (std::size_t k = window_last + 1; k < s.size(); ++k) {
    state = sign_state(std::log(s.closes[k] / s.closes[k - 1]), state);
    const double price = s.closes[k];
    const bool downtick_exit = state == State::Down && price >= rule.x_star;
    const bool uptick_exit = rule.regime == Regime::CaseII && price >= *rule.x0_star;
    if (downtick_exit || uptick_exit) {
      ExecutedSale sale;
      sale.date = s.timestamps.size() == s.size() ? s.timestamps[k] : std::to_string(k);
      sale.index = k;
      sale.price = price;
      sale.inferred_state = state;
      sale.trigger_window = trigger;
      sale.x_star = rule.x_star;
      sale.x0_star = rule.x0_star;
      return sale;
    }
  }
  return std::nullopt;
}

}  // namespace

BacktestReport run_backtest(const PriceSeries& series, const BacktestConfig& config) {
  if (config.window_len == 0) throw std::invalid_argument("window length must be positive");
  if (config.window_len > series.size())
    throw std::invalid_argument("window length " + std::to_string(config.window_len) +
                                " exceeds the series length " + std::to_string(series.size()));

  BacktestReport report;
  report.config = config;
  const std::size_t L = config.window_len;
  const std::size_t n_windows = series.size() / L;

  for (std::size_t w = 0; w < n_windows; ++w) {
    BacktestWindow win;
    win.first_index = w * L;
    win.last_index = w * L + L - 1;
    if (report.executed_sale && win.last_index >= report.executed_sale->index) break;
    win.label = label_of(series, win.first_index, win.last_index);

    try {
      win.calibration = calibrate(series.slice(win.first_index, L), config.rho);
    } catch (const CalibrationError& e) {
      win.diagnostic = e.what();
      report.windows.push_back(std::move(win));
      continue;
    }

    const auto params = win.calibration->params(config.K);
    std::vector<Violation> violations;
    try {
      violations = validate(params);
    } catch (const ParameterError& e) {
      win.diagnostic = e.what();
      report.windows.push_back(std::move(win));
      continue;
    }
    if (!violations.empty()) {
      win.diagnostic = violations.front().message;
      report.windows.push_back(std::move(win));
      continue;
    }

    win.decision = Decision::SellRegime;
    if (!report.rule) {
      try {
        report.rule = solve(params);
        report.executed_sale = scan_for_sale(series, *report.rule, w, win.first_index, win.last_index);
      } catch (const std::exception& e) {
        win.decision = Decision::Hold;
        win.diagnostic = e.what();
        report.rule.reset();
      }
    }
    report.windows.push_back(std::move(win));
  }

  if (report.executed_sale && report.rule && report.executed_sale->price > 1000.0 * report.rule->x_star) {
    std::ostringstream os;
    os.precision(12);
    os << "x* = " << report.rule->x_star << " is far below the price scale (sale at "
       << report.executed_sale->price << "); the downtick condition alone decided the sale";
    report.notes.push_back(os.str());
  }
  if (report.rule && !report.executed_sale)
    report.notes.push_back("selling regime detected but no day after the signal met the selling condition");
  return report;
}

}  // namespace mcsell
