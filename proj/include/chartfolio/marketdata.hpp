#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "chartfolio/types.hpp"

namespace chartfolio {

inline constexpr int kBarMinutes = 5;
inline constexpr int kSessionOpenMinute = 9 * 60 + 30;
inline constexpr int kSessionCloseMinute = 16 * 60;
inline constexpr int kBarsPerSession = (kSessionCloseMinute - kSessionOpenMinute) / kBarMinutes;
inline constexpr int kFirstHourBars = 60 / kBarMinutes;

using Date = std::chrono::year_month_day;

std::string format_date(Date d);
/// Parses YYYY-MM-DD.
Date parse_date(std::string_view text);

/// Exchange-local wall time together with its UTC offset.
struct Timestamp {
  std::int64_t utc_seconds = 0;
  int offset_minutes = 0;

  std::int64_t local_seconds() const { return utc_seconds + offset_minutes * 60LL; }
  Date local_date() const;
  int minute_of_day() const;
  /// ISO-8601 with numeric offset, e.g. 2022-01-14T09:30:00-05:00.
  std::string iso() const;

  friend bool operator==(const Timestamp& a, const Timestamp& b) = default;
};

/// Supported zone names: "America/New_York" (US Eastern, 2007+ DST rules) and
/// "UTC". Returns the offset in minutes for a UTC instant.
int zone_offset_minutes(const std::string& zone, std::int64_t utc_seconds);
bool is_supported_zone(const std::string& zone);

/// Parses ISO-8601 date-time. With an explicit offset (or Z) the instant is
/// exact and re-expressed in `zone`; without one it is read as wall time in
/// `zone`.
Timestamp parse_timestamp(std::string_view text, const std::string& zone);

struct OhlcvBar {
  Timestamp time;
  double open = 0, high = 0, low = 0, close = 0;
  std::int64_t volume = 0;

  friend bool operator==(const OhlcvBar&, const OhlcvBar&) = default;
};

/// Returns an empty string when the bar satisfies the OHLC invariants,
/// otherwise a description of the first violation.
std::string validate_bar(const OhlcvBar& bar);

struct TradingSession {
  std::string ticker;
  Date date;
  std::vector<OhlcvBar> bars;
  /// False once any row of this ticker-day failed validation.
  bool valid = true;
  std::vector<std::string> issues;

  /// Valid and exactly the 78 regular-hours bars 9:30, 9:35, ..., 15:55.
  bool complete() const;
  std::string id() const { return ticker + ":" + format_date(date); }
};

struct RowError {
  std::string source;
  std::size_t line = 0;
  std::string message;
};

struct BarSchema {
  std::string ticker = "ticker";
  std::string timestamp = "timestamp";
  std::string open = "open";
  std::string high = "high";
  std::string low = "low";
  std::string close = "close";
  std::string volume = "volume";
  /// Required. Exchange zone used to interpret timestamps.
  std::string zone;
};

struct LoadResult {
  std::vector<TradingSession> sessions;
  std::vector<RowError> errors;
};

/// Groups rows by (ticker, local date) into sessions ordered by ticker, date
/// and timestamp. Bad rows are returned as errors and mark their session
/// invalid. Bars outside 9:30-16:00 are reported and skipped.
LoadResult parse_bars_csv(const std::string& text, const BarSchema& schema,
                          const std::string& source = "<memory>");
LoadResult load_bars_csv(const std::filesystem::path& path, const BarSchema& schema);

/// Canonical `ticker,timestamp,open,high,low,close,volume` text.
std::string serialize_sessions_csv(std::span<const TradingSession> sessions);

/// The 12 bars starting 9:30 through 10:25.
std::vector<OhlcvBar> slice_first_hour(const TradingSession& session);

struct ReferencePrices {
  double p0 = 0;  ///< close of the 10:25-10:30 bar
  double pT = 0;  ///< close of the 15:55-16:00 bar
};
ReferencePrices extract_reference_prices(const TradingSession& session);

/// Raised when a session cannot supply what was asked of it.
class SessionError : public InputError {
 public:
  using InputError::InputError;
};

}  // namespace chartfolio
