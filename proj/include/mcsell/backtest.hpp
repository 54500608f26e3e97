// Rolling-window decision workflow on a historical close series.
//
// Each complete window is calibrated on its own closes. A window whose fitted
// parameters fail (A1)/(A2) means hold through the next window. The first
// window that passes fixes a selling rule; from the next day on the state is
// inferred from the sign of the daily log-increment and the position is sold
// on the first day in the downtick state with close >= x* (or, in Case II,
// any day with close >= x0*).

#ifndef MCSELL_BACKTEST_HPP
#define MCSELL_BACKTEST_HPP

#include <optional>
#include <string>
#include <vector>

#include "mcsell/calibration.hpp"
#include "mcsell/solver.hpp"

namespace mcsell {

enum class Decision { Hold, SellRegime };
const char* to_string(Decision d);

struct BacktestConfig {
  std::size_t window_len = 126;
  double rho = 0.03;
  double K = 0.01;
};

struct BacktestWindow {
  std::string label;  // "<first timestamp>..<last timestamp>"
  std::size_t first_index = 0;
  std::size_t last_index = 0;
  std::optional<CalibrationResult> calibration;
  Decision decision = Decision::Hold;
  std::string diagnostic;
};

struct ExecutedSale {
  std::string date;
  std::size_t index = 0;
  double price = 0.0;
  State inferred_state = State::Down;
  std::size_t trigger_window = 0;
  double x_star = 0.0;
  std::optional<double> x0_star;
};

struct BacktestReport {
  BacktestConfig config;
  std::vector<BacktestWindow> windows;
  std::optional<SellingRule> rule;  // rule fixed by the first SellRegime window
  std::optional<ExecutedSale> executed_sale;
  std::vector<std::string> notes;
};

// Throws std::invalid_argument when the window is empty or longer than the series.
BacktestReport run_backtest(const PriceSeries& series, const BacktestConfig& config);

}  // namespace mcsell

#endif  // MCSELL_BACKTEST_HPP
