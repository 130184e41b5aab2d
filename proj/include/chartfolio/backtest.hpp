#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chartfolio/types.hpp"

namespace chartfolio {

struct TradeOpportunity {
  std::string sample_id;
  std::string date;
  double p_open = 0;   ///< p0
  double p_close = 0;  ///< pT
  std::optional<ClassLabel> predicted;
  ClassLabel true_label = ClassLabel::C0;

  double net_return() const { return p_close / p_open - 1.0; }
};

class Policy {
 public:
  enum class Kind { All, PredictedC1, TrueC1, Random };

  static Policy all() { return Policy(Kind::All, 1.0); }
  static Policy predicted_c1() { return Policy(Kind::PredictedC1, 1.0); }
  static Policy true_c1() { return Policy(Kind::TrueC1, 1.0); }
  /// Each opportunity independently with probability p, keyed by sample id.
  static Policy random(double p);
  /// "all", "predicted_c1", "true_c1" or "random:<p>".
  static Policy parse(const std::string& text);

  Kind kind() const { return kind_; }
  double probability() const { return p_; }
  std::string name() const;

  bool selects(const TradeOpportunity& opp, std::uint64_t seed) const;

 private:
  Policy(Kind k, double p) : kind_(k), p_(p) {}
  Kind kind_;
  double p_;
};

enum class BacktestMode { Sequential, DailyBatch };

struct BacktestConfig {
  double initial_wealth = 1000;
  /// Per-position cap; +inf for unbounded.
  double beta = HUGE_VAL;
  Policy policy = Policy::predicted_c1();
  std::uint64_t seed = 0;
  BacktestMode mode = BacktestMode::Sequential;

  void validate() const;
};

struct LedgerEntry {
  std::size_t step = 0;
  std::string sample_id;
  std::string date;
  double stake = 0;
  double net_return = 0;
  double pnl = 0;
  double wealth_after = 0;
};

struct WealthPoint {
  std::string date;
  double wealth = 0;
};

struct BacktestReport {
  std::string policy;
  BacktestMode mode = BacktestMode::Sequential;
  double initial_wealth = 0;
  double final_wealth = 0;
  std::size_t trade_count = 0;
  /// Average net return of executed trades.
  double mean_trade_yield = 0;
  /// Starts with ("start", v0), then one point per date (or per trade in
  /// sequential mode).
  std::vector<WealthPoint> wealth_series;
  std::vector<LedgerEntry> ledger;

  /// final_wealth / trade_count, the "amount per trade" column.
  double amount_per_trade() const {
    return trade_count ? final_wealth / static_cast<double>(trade_count) : 0.0;
  }
};

/// min(beta, v / n_trades) clamped at 0.
double position_size(double wealth, std::size_t n_trades, double beta);

/// One position at a time, in the given order; each selected trade stakes
/// max(0, min(v, beta)).
BacktestReport run_sequential(std::span<const TradeOpportunity> opps, const BacktestConfig& cfg);

/// Per date, all selected trades open together at position_size(v, count,
/// beta) and settle at the close. Settlement order within a day is canonical
/// (by sample id), so input order within a day cannot matter.
BacktestReport run_daily_batch(std::span<const TradeOpportunity> opps, const BacktestConfig& cfg);

BacktestReport run_backtest(std::span<const TradeOpportunity> opps, const BacktestConfig& cfg);

/// Rows: policy, then amount / trades / amount-per-trade for each mode.
std::string format_trading_table(std::span<const BacktestReport> sequential,
                                 std::span<const BacktestReport> daily);
std::string serialize_ledger_csv(const BacktestReport& report);
std::string serialize_wealth_csv(const BacktestReport& report);

/// `sample_id,date,p0,pT,true_label,predicted`; predicted may be empty.
std::string serialize_opportunities_csv(std::span<const TradeOpportunity> opps);
std::vector<TradeOpportunity> parse_opportunities_csv(const std::string& text);
std::vector<TradeOpportunity> load_opportunities_csv(const std::filesystem::path& path);

}  // namespace chartfolio
