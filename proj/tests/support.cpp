#include "support.hpp"

#include <cstdio>

#include "chartfolio/csv.hpp"

namespace chartfolio::fixtures {

namespace fs = std::filesystem;

std::string session_csv(const std::string& ticker, const std::string& date,
                        const std::vector<double>& closes, bool header) {
  std::string out = header ? "ticker,timestamp,open,high,low,close,volume\n" : "";
  double prev = closes.empty() ? 100.0 : closes.front();
  for (std::size_t i = 0; i < closes.size(); ++i) {
    const int minute = kSessionOpenMinute + static_cast<int>(i) * kBarMinutes;
    char ts[40];
    std::snprintf(ts, sizeof ts, "%sT%02d:%02d:00-05:00", date.c_str(), minute / 60, minute % 60);
    const double open = prev, close = closes[i];
    const double hi = std::max(open, close) + 0.05, lo = std::min(open, close) - 0.05;
    out += ticker + "," + ts + "," + format_double(open) + "," + format_double(hi) + "," +
           format_double(lo) + "," + format_double(close) + "," + std::to_string(1000 + 10 * i) + "\n";
    prev = close;
  }
  return out;
}

TradingSession make_session(const std::string& ticker, const std::string& date,
                            const std::vector<double>& closes) {
  BarSchema schema;
  schema.zone = "America/New_York";
  auto r = parse_bars_csv(session_csv(ticker, date, closes), schema);
  if (r.sessions.size() != 1) throw std::logic_error("fixture did not produce one session");
  return r.sessions.front();
}

std::vector<OhlcvBar> random_first_hour(RngStream& rng) {
  std::vector<OhlcvBar> bars;
  double price = 20.0 + 180.0 * rng.uniform();
  for (int i = 0; i < kFirstHourBars; ++i) {
    OhlcvBar b;
    b.time.utc_seconds = 1642170600 + i * 300;
    b.time.offset_minutes = -300;
    b.open = price;
    b.close = price * (1.0 + 0.02 * (rng.uniform() - 0.5));
    b.high = std::max(b.open, b.close) * (1.0 + 0.005 * rng.uniform());
    b.low = std::min(b.open, b.close) * (1.0 - 0.005 * rng.uniform());
    b.volume = 100 + static_cast<std::int64_t>(rng.below(100000));
    bars.push_back(b);
    price = b.close;
  }
  return bars;
}

std::vector<PredictionRecord> table_fixture_records() {
  const int all[3][3] = {{1200, 728, 386}, {185, 324, 57}, {131, 56, 112}};
  const int confident[3][3] = {{46, 1, 5}, {2, 14, 0}, {0, 0, 3}};
  std::vector<PredictionRecord> out;
  std::size_t id = 0;
  for (int t = 0; t < 3; ++t) {
    for (int p = 0; p < 3; ++p) {
      for (int k = 0; k < all[t][p]; ++k) {
        const double top = k < confident[t][p] ? 0.96 : 0.34 + 0.6 * (k % 997) / 997.0;
        PredictionRecord r;
        char buf[16];
        std::snprintf(buf, sizeof buf, "S%05zu", id++);
        r.sample_id = buf;
        r.true_label = label_from_index(t);
        r.softmax = Vector3::Constant((1.0 - top) / 2.0);
        r.softmax[p] = top;
        r.predicted = label_from_index(p);
        out.push_back(std::move(r));
      }
    }
  }
  return out;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("chartfolio_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace chartfolio::fixtures
