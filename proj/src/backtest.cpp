#include "chartfolio/backtest.hpp"

#include <algorithm>
#include <map>
#include <tuple>

#include "chartfolio/csv.hpp"
#include "chartfolio/rng.hpp"

namespace chartfolio {

Policy Policy::random(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw InputError("random policy probability must lie in [0, 1]");
  return Policy(Kind::Random, p);
}

Policy Policy::parse(const std::string& text) {
  if (text == "all") return all();
  if (text == "predicted_c1") return predicted_c1();
  if (text == "true_c1") return true_c1();
  if (text.rfind("random:", 0) == 0) {
    const auto p = parse_double(text.substr(7));
    if (!p) throw InputError("bad random policy probability: " + text);
    return random(*p);
  }
  throw InputError("unknown policy: " + text);
}

std::string Policy::name() const {
  switch (kind_) {
    case Kind::All: return "all";
    case Kind::PredictedC1: return "predicted_c1";
    case Kind::TrueC1: return "true_c1";
    case Kind::Random: return "random:" + format_double(p_);
  }
  return "?";
}

bool Policy::selects(const TradeOpportunity& opp, std::uint64_t seed) const {
  switch (kind_) {
    case Kind::All: return true;
    case Kind::PredictedC1: return opp.predicted == ClassLabel::C1;
    case Kind::TrueC1: return opp.true_label == ClassLabel::C1;
    case Kind::Random: {
      auto rng = RngStream::derive(seed, "policy", opp.sample_id);
      return rng.uniform() < p_;
    }
  }
  return false;
}

void BacktestConfig::validate() const {
  if (!(initial_wealth > 0) || !std::isfinite(initial_wealth)) {
    throw InputError("initial wealth must be positive");
  }
  if (!(beta > 0)) throw InputError("beta must be positive or inf");
}

double position_size(double wealth, std::size_t n_trades, double beta) {
  if (n_trades == 0) throw InputError("position_size: n_trades must be at least 1");
  return std::max(0.0, std::min(beta, wealth / static_cast<double>(n_trades)));
}

namespace {

void finish(BacktestReport& r) {
  r.trade_count = r.ledger.size();
  double sum = 0;
  for (const auto& e : r.ledger) sum += e.net_return;
  r.mean_trade_yield = r.trade_count ? sum / static_cast<double>(r.trade_count) : 0.0;
}

BacktestReport start_report(const BacktestConfig& cfg) {
  cfg.validate();
  BacktestReport r;
  r.policy = cfg.policy.name();
  r.mode = cfg.mode;
  r.initial_wealth = cfg.initial_wealth;
  r.final_wealth = cfg.initial_wealth;
  r.wealth_series.push_back({"start", cfg.initial_wealth});
  return r;
}

}  // namespace

BacktestReport run_sequential(std::span<const TradeOpportunity> opps, const BacktestConfig& cfg) {
  auto r = start_report(cfg);
  double v = cfg.initial_wealth;
  for (const auto& opp : opps) {
    if (!cfg.policy.selects(opp, cfg.seed)) continue;
    const double stake = std::max(0.0, std::min(v, cfg.beta));
    const double ret = opp.net_return();
    const double pnl = stake * ret;
    v += pnl;
    r.ledger.push_back({r.ledger.size(), opp.sample_id, opp.date, stake, ret, pnl, v});
    r.wealth_series.push_back({opp.date, v});
  }
  r.final_wealth = v;
  finish(r);
  return r;
}

BacktestReport run_daily_batch(std::span<const TradeOpportunity> opps, const BacktestConfig& cfg) {
  auto r = start_report(cfg);
  std::map<std::string, std::vector<const TradeOpportunity*>> by_date;
  for (const auto& opp : opps) {
    if (cfg.policy.selects(opp, cfg.seed)) by_date[opp.date].push_back(&opp);
    else by_date[opp.date];
  }
  double v = cfg.initial_wealth;
  for (auto& [date, day] : by_date) {
    std::sort(day.begin(), day.end(), [](const TradeOpportunity* a, const TradeOpportunity* b) {
      return std::tie(a->sample_id, a->p_open, a->p_close) < std::tie(b->sample_id, b->p_open, b->p_close);
    });
    if (!day.empty()) {
      const double stake = position_size(v, day.size(), cfg.beta);
      double day_pnl = 0;
      for (const auto* opp : day) {
        const double ret = opp->net_return();
        const double pnl = stake * ret;
        day_pnl += pnl;
        r.ledger.push_back({r.ledger.size(), opp->sample_id, date, stake, ret, pnl, 0.0});
      }
      v += day_pnl;
      for (std::size_t k = r.ledger.size() - day.size(); k < r.ledger.size(); ++k) {
        r.ledger[k].wealth_after = v;
      }
    }
    r.wealth_series.push_back({date, v});
  }
  r.final_wealth = v;
  finish(r);
  return r;
}

BacktestReport run_backtest(std::span<const TradeOpportunity> opps, const BacktestConfig& cfg) {
  return cfg.mode == BacktestMode::Sequential ? run_sequential(opps, cfg) : run_daily_batch(opps, cfg);
}

std::string format_trading_table(std::span<const BacktestReport> sequential,
                                 std::span<const BacktestReport> daily) {
  std::string out = "Type";
  if (!sequential.empty()) out += ",One at a time: Amount,Trades,Amount per Trade";
  if (!daily.empty()) out += ",Multiple at a time: Amount,Trades,Amount per Trade";
  out += "\n";
  const std::size_t rows = std::max(sequential.size(), daily.size());
  for (std::size_t i = 0; i < rows; ++i) {
    out += i < sequential.size() ? sequential[i].policy : daily[i].policy;
    for (auto part : {sequential, daily}) {
      if (part.empty()) continue;
      const auto& rep = part[i];
      out += "," + format_fixed(rep.final_wealth, 2) + "," + std::to_string(rep.trade_count) + "," +
             format_fixed(rep.amount_per_trade(), 2);
    }
    out += "\n";
  }
  return out;
}

std::string serialize_ledger_csv(const BacktestReport& report) {
  std::string out = "step,sample_id,date,stake,net_return,pnl,wealth_after\n";
  for (const auto& e : report.ledger) {
    out += std::to_string(e.step) + "," + e.sample_id + "," + e.date + "," + format_double(e.stake) +
           "," + format_double(e.net_return) + "," + format_double(e.pnl) + "," +
           format_double(e.wealth_after) + "\n";
  }
  return out;
}

std::string serialize_wealth_csv(const BacktestReport& report) {
  std::string out = "date,wealth\n";
  for (const auto& p : report.wealth_series) out += p.date + "," + format_double(p.wealth) + "\n";
  return out;
}

std::string serialize_opportunities_csv(std::span<const TradeOpportunity> opps) {
  std::string out = "sample_id,date,p0,pT,true_label,predicted\n";
  for (const auto& o : opps) {
    out += o.sample_id + "," + o.date + "," + format_double(o.p_open) + "," + format_double(o.p_close) +
           "," + to_string(o.true_label) + "," + (o.predicted ? to_string(*o.predicted) : "") + "\n";
  }
  return out;
}

std::vector<TradeOpportunity> parse_opportunities_csv(const std::string& text) {
  const auto table = CsvTable::parse(text);
  table.require({"sample_id", "date", "p0", "pT", "true_label", "predicted"});
  const auto c_id = table.column("sample_id"), c_d = table.column("date"), c_p0 = table.column("p0"),
             c_pT = table.column("pT"), c_t = table.column("true_label"),
             c_p = table.column("predicted");
  std::vector<TradeOpportunity> out;
  for (const auto& row : table.rows()) {
    auto fail = [&](const std::string& why) {
      throw InputError("opportunities line " + std::to_string(row.line) + ": " + why);
    };
    if (row.fields.size() != table.header().size()) fail("wrong field count");
    TradeOpportunity o;
    o.sample_id = row.fields[c_id];
    o.date = row.fields[c_d];
    if (o.sample_id.empty() || o.date.empty()) fail("missing sample_id or date");
    const auto p0 = parse_double(row.fields[c_p0]), pT = parse_double(row.fields[c_pT]);
    if (!p0 || !pT || !(*p0 > 0) || !(*pT > 0) || !std::isfinite(*p0) || !std::isfinite(*pT)) {
      fail("prices must be positive and finite");
    }
    o.p_open = *p0;
    o.p_close = *pT;
    const auto t = parse_label(row.fields[c_t]);
    if (!t) fail("bad true_label");
    o.true_label = *t;
    if (!row.fields[c_p].empty()) {
      const auto p = parse_label(row.fields[c_p]);
      if (!p) fail("bad predicted label");
      o.predicted = *p;
    }
    out.push_back(std::move(o));
  }
  return out;
}

std::vector<TradeOpportunity> load_opportunities_csv(const std::filesystem::path& path) {
  try {
    return parse_opportunities_csv(read_text_file(path));
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

}  // namespace chartfolio
