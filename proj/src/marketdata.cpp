#include "chartfolio/marketdata.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <tuple>

#include "chartfolio/csv.hpp"

namespace chartfolio {

namespace {

using namespace std::chrono;

std::int64_t days_to_seconds(sys_days d) { return d.time_since_epoch().count() * 86400LL; }

sys_days nth_sunday(int y, unsigned month, unsigned n) {
  return sys_days{year{y} / month / weekday_indexed{Sunday, n}};
}

bool read_int(std::string_view s, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > s.size()) return false;
  int v = 0;
  for (std::size_t i = pos; i < pos + len; ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
    v = v * 10 + (s[i] - '0');
  }
  out = v;
  return true;
}

}  // namespace

std::string format_date(Date d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
  return buf;
}

Date parse_date(std::string_view text) {
  int y, m, d;
  if (text.size() != 10 || text[4] != '-' || text[7] != '-' || !read_int(text, 0, 4, y) ||
      !read_int(text, 5, 2, m) || !read_int(text, 8, 2, d)) {
    throw InputError("bad date: " + std::string(text));
  }
  Date out{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
  if (!out.ok()) throw InputError("bad date: " + std::string(text));
  return out;
}

Date Timestamp::local_date() const {
  const auto days = static_cast<int>((local_seconds() >= 0 ? local_seconds()
                                                           : local_seconds() - 86399) / 86400);
  return Date{sys_days{std::chrono::days{days}}};
}

int Timestamp::minute_of_day() const {
  const std::int64_t s = ((local_seconds() % 86400) + 86400) % 86400;
  return static_cast<int>(s / 60);
}

std::string Timestamp::iso() const {
  const std::int64_t s = ((local_seconds() % 86400) + 86400) % 86400;
  const int off = offset_minutes;
  const int aoff = off < 0 ? -off : off;
  char buf[48];
  std::snprintf(buf, sizeof buf, "%sT%02d:%02d:%02d%c%02d:%02d", format_date(local_date()).c_str(),
                static_cast<int>(s / 3600), static_cast<int>((s / 60) % 60),
                static_cast<int>(s % 60), off < 0 ? '-' : '+', aoff / 60, aoff % 60);
  return buf;
}

bool is_supported_zone(const std::string& zone) {
  return zone == "America/New_York" || zone == "UTC" || zone == "Etc/UTC";
}

int zone_offset_minutes(const std::string& zone, std::int64_t utc_seconds) {
  if (zone == "UTC" || zone == "Etc/UTC") return 0;
  if (zone != "America/New_York") throw InputError("unsupported time zone: " + zone);
  const Date d{sys_days{std::chrono::days{
      static_cast<int>((utc_seconds >= 0 ? utc_seconds : utc_seconds - 86399) / 86400)}}};
  const int y = static_cast<int>(d.year());
  // DST from 2:00 EST on the second Sunday of March to 2:00 EDT on the first
  // Sunday of November.
  const std::int64_t start = days_to_seconds(nth_sunday(y, 3, 2)) + 7 * 3600;
  const std::int64_t end = days_to_seconds(nth_sunday(y, 11, 1)) + 6 * 3600;
  return (utc_seconds >= start && utc_seconds < end) ? -240 : -300;
}

Timestamp parse_timestamp(std::string_view text, const std::string& zone) {
  const std::string t = trim(text);
  auto fail = [&]() -> Timestamp { throw InputError("bad timestamp: " + t); };
  if (t.size() < 16) return fail();
  const Date date = parse_date(std::string_view(t).substr(0, 10));
  if (t[10] != 'T' && t[10] != ' ') return fail();
  int hh, mm, ss = 0;
  if (!read_int(t, 11, 2, hh) || t[13] != ':' || !read_int(t, 14, 2, mm)) return fail();
  std::size_t pos = 16;
  if (pos < t.size() && t[pos] == ':') {
    if (!read_int(t, pos + 1, 2, ss)) return fail();
    pos += 3;
    if (pos < t.size() && t[pos] == '.') {
      ++pos;
      while (pos < t.size() && t[pos] >= '0' && t[pos] <= '9') ++pos;
    }
  }
  if (hh > 23 || mm > 59 || ss > 60) return fail();
  const std::int64_t wall = days_to_seconds(sys_days{date}) + hh * 3600LL + mm * 60LL + ss;

  if (!is_supported_zone(zone)) throw InputError("unsupported time zone: " + zone);
  Timestamp out;
  if (pos == t.size()) {
    // Guess standard time, then settle on the offset in force at that instant.
    const int off = zone_offset_minutes(zone, wall - zone_offset_minutes(zone, wall) * 60LL);
    out.utc_seconds = wall - off * 60LL;
  } else if (t[pos] == 'Z' && pos + 1 == t.size()) {
    out.utc_seconds = wall;
  } else if (t[pos] == '+' || t[pos] == '-') {
    int oh, om;
    const int sign = t[pos] == '-' ? -1 : 1;
    if (read_int(t, pos + 1, 2, oh) && pos + 6 == t.size() && t[pos + 3] == ':' &&
        read_int(t, pos + 4, 2, om)) {
    } else if (!(read_int(t, pos + 1, 2, oh) && pos + 5 == t.size() && read_int(t, pos + 3, 2, om))) {
      return fail();
    }
    out.utc_seconds = wall - sign * (oh * 3600LL + om * 60LL);
  } else {
    return fail();
  }
  out.offset_minutes = zone_offset_minutes(zone, out.utc_seconds);
  return out;
}

std::string validate_bar(const OhlcvBar& b) {
  if (!(b.open > 0 && b.high > 0 && b.low > 0 && b.close > 0)) return "non-positive price";
  if (b.low > b.high) return "low > high";
  if (b.low > std::min(b.open, b.close)) return "low above open/close";
  if (b.high < std::max(b.open, b.close)) return "high below open/close";
  if (b.volume < 0) return "negative volume";
  if (b.time.local_seconds() % (kBarMinutes * 60) != 0) return "timestamp not on a 5-minute boundary";
  return {};
}

bool TradingSession::complete() const {
  if (!valid || bars.size() != static_cast<std::size_t>(kBarsPerSession)) return false;
  for (int i = 0; i < kBarsPerSession; ++i) {
    if (bars[i].time.minute_of_day() != kSessionOpenMinute + i * kBarMinutes) return false;
  }
  return true;
}

LoadResult parse_bars_csv(const std::string& text, const BarSchema& schema,
                          const std::string& source) {
  if (schema.zone.empty()) {
    throw InputError("time zone must be given explicitly (e.g. --tz America/New_York)");
  }
  if (!is_supported_zone(schema.zone)) throw InputError("unsupported time zone: " + schema.zone);
  CsvTable table = CsvTable::parse(text);
  table.require({schema.ticker, schema.timestamp, schema.open, schema.high, schema.low,
                 schema.close, schema.volume});
  const auto c_ticker = table.column(schema.ticker), c_ts = table.column(schema.timestamp),
             c_o = table.column(schema.open), c_h = table.column(schema.high),
             c_l = table.column(schema.low), c_c = table.column(schema.close),
             c_v = table.column(schema.volume);
  const std::size_t width = table.header().size();

  LoadResult result;
  // (ticker, days since epoch) -> session
  std::map<std::pair<std::string, int>, TradingSession> grouped;
  std::map<std::pair<std::string, int>, std::vector<std::size_t>> lines;

  for (const auto& row : table.rows()) {
    auto report = [&](const std::string& msg) { result.errors.push_back({source, row.line, msg}); };
    if (row.fields.size() != width) {
      report("expected " + std::to_string(width) + " fields, got " + std::to_string(row.fields.size()));
      continue;
    }
    const std::string& ticker = row.fields[c_ticker];
    if (ticker.empty()) {
      report("empty ticker");
      continue;
    }
    OhlcvBar bar;
    try {
      bar.time = parse_timestamp(row.fields[c_ts], schema.zone);
    } catch (const InputError& e) {
      report(e.what());
      continue;
    }
    const auto o = parse_double(row.fields[c_o]), h = parse_double(row.fields[c_h]),
               l = parse_double(row.fields[c_l]), c = parse_double(row.fields[c_c]);
    const auto v = parse_int(row.fields[c_v]);
    const int day = static_cast<int>(sys_days{bar.time.local_date()}.time_since_epoch().count());
    auto key = std::make_pair(ticker, day);
    auto& session = grouped[key];
    if (session.ticker.empty()) {
      session.ticker = ticker;
      session.date = bar.time.local_date();
    }
    if (!o || !h || !l || !c || !v) {
      report("unparsable price or volume");
      session.valid = false;
      session.issues.push_back("line " + std::to_string(row.line) + ": unparsable row");
      continue;
    }
    bar.open = *o;
    bar.high = *h;
    bar.low = *l;
    bar.close = *c;
    bar.volume = *v;
    if (auto why = validate_bar(bar); !why.empty()) {
      report(why);
      session.valid = false;
      session.issues.push_back("line " + std::to_string(row.line) + ": " + why);
      continue;
    }
    const int minute = bar.time.minute_of_day();
    if (minute < kSessionOpenMinute || minute >= kSessionCloseMinute) {
      report("outside regular trading hours, skipped");
      continue;
    }
    session.bars.push_back(bar);
    lines[key].push_back(row.line);
  }

  for (auto& [key, session] : grouped) {
    auto& ls = lines[key];
    std::vector<std::size_t> order(session.bars.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return session.bars[a].time.utc_seconds < session.bars[b].time.utc_seconds;
    });
    std::vector<OhlcvBar> sorted;
    sorted.reserve(order.size());
    for (std::size_t k = 0; k < order.size(); ++k) {
      const auto& bar = session.bars[order[k]];
      if (!sorted.empty() && sorted.back().time.utc_seconds == bar.time.utc_seconds) {
        const std::string msg = "duplicate timestamp " + bar.time.iso();
        result.errors.push_back({source, ls[order[k]], msg});
        session.valid = false;
        session.issues.push_back(msg);
        continue;
      }
      sorted.push_back(bar);
    }
    session.bars = std::move(sorted);
    if (session.valid && !session.complete()) {
      session.issues.push_back("incomplete: " + std::to_string(session.bars.size()) + " of " +
                               std::to_string(kBarsPerSession) + " bars");
    }
    result.sessions.push_back(std::move(session));
  }
  return result;
}

LoadResult load_bars_csv(const std::filesystem::path& path, const BarSchema& schema) {
  return parse_bars_csv(read_text_file(path), schema, path.string());
}

std::string serialize_sessions_csv(std::span<const TradingSession> sessions) {
  std::string out = "ticker,timestamp,open,high,low,close,volume\n";
  for (const auto& s : sessions) {
    for (const auto& b : s.bars) {
      out += s.ticker + "," + b.time.iso() + "," + format_double(b.open) + "," +
             format_double(b.high) + "," + format_double(b.low) + "," + format_double(b.close) +
             "," + std::to_string(b.volume) + "\n";
    }
  }
  return out;
}

std::vector<OhlcvBar> slice_first_hour(const TradingSession& session) {
  if (!session.valid) throw SessionError(session.id() + ": invalid session");
  for (int i = 0; i < kFirstHourBars; ++i) {
    if (static_cast<std::size_t>(i) >= session.bars.size() ||
        session.bars[i].time.minute_of_day() != kSessionOpenMinute + i * kBarMinutes) {
      throw SessionError(session.id() + ": incomplete first hour");
    }
  }
  if (!session.complete()) throw SessionError(session.id() + ": incomplete session");
  return {session.bars.begin(), session.bars.begin() + kFirstHourBars};
}

ReferencePrices extract_reference_prices(const TradingSession& session) {
  if (!session.complete()) throw SessionError(session.id() + ": incomplete session");
  return {session.bars[kFirstHourBars - 1].close, session.bars[kBarsPerSession - 1].close};
}

}  // namespace chartfolio
