// JSON and CSV formats shared by the CLI and tests.
//
// Numbers are written with 12 significant digits; non-finite values become null.

#ifndef MCSELL_IO_HPP
#define MCSELL_IO_HPP

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mcsell/backtest.hpp"
#include "mcsell/calibration.hpp"
#include "mcsell/model.hpp"
#include "mcsell/simulator.hpp"
#include "mcsell/solver.hpp"
#include "mcsell/verifier.hpp"

namespace mcsell {

using json = nlohmann::json;

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kOutputDigits = 12;

double round_significant(double v, int digits = kOutputDigits);
std::string format_number(double v, int digits = kOutputDigits);

// Pretty-prints with every float at kOutputDigits significant digits.
void write_json(std::ostream& out, const json& j, int indent = 2);
std::string dump_json(const json& j, int indent = 2);

void to_json(json& j, const ModelParams& p);
// Requires all six keys with finite numeric values; does not check signs.
void from_json(const json& j, ModelParams& p);

void to_json(json& j, const DerivedQuantities& d);
void to_json(json& j, const Diagnostic& d);

void to_json(json& j, const SellingRule& r);
// Derived quantities are recomputed from the embedded params.
void from_json(const json& j, SellingRule& r);

void to_json(json& j, const GridSpec& g);
void to_json(json& j, const VerificationReport& r);
void to_json(json& j, const McEstimate& e);
void to_json(json& j, const CalibrationResult& c);
void to_json(json& j, const BacktestReport& r);

// `date,close` with a header row. Any column order is accepted as long as
// both columns are named.
PriceSeries read_price_csv(std::istream& in, double delta = 1.0 / kTradingDaysPerYear);
PriceSeries read_price_csv_file(const std::string& path, double delta = 1.0 / kTradingDaysPerYear);
void write_price_csv(std::ostream& out, const PriceSeries& s);

// x, v(x,1), v(x,2)
void write_value_csv(std::ostream& out, const SellingRule& rule, const std::vector<double>& xs);
// t, state, price: one row at t = 0, one per jump and one at the horizon.
void write_path_csv(std::ostream& out, const ChainPath& path);
void write_gbm_csv(std::ostream& out, const std::vector<GbmLimitRow>& rows);
// period, f1, f2, lambda1, lambda2, Phi(rho), decision
void write_window_csv(std::ostream& out, const BacktestReport& report);

}  // namespace mcsell

#endif  // MCSELL_IO_HPP
