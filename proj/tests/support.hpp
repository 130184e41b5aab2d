#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "chartfolio/classifier.hpp"
#include "chartfolio/marketdata.hpp"
#include "chartfolio/rng.hpp"

namespace chartfolio::fixtures {

/// CSV text for one regular 78-bar day. `closes` holds one close per bar;
/// each bar opens at the previous close. Dates must fall in standard time
/// (offset -05:00).
std::string session_csv(const std::string& ticker, const std::string& date,
                        const std::vector<double>& closes, bool header = true);

TradingSession make_session(const std::string& ticker, const std::string& date,
                            const std::vector<double>& closes);

/// Random walk first hour: 12 bars with positive prices and volumes.
std::vector<OhlcvBar> random_first_hour(RngStream& rng);

/// 3179 records whose argmax confusion is the 3x3 count matrix
/// [[1200,728,386],[185,324,57],[131,56,112]]. Exactly 71 of them have a top
/// probability of 0.96 and realize [[46,1,5],[2,14,0],[0,0,3]]; every other
/// record tops out below 0.95.
std::vector<PredictionRecord> table_fixture_records();

/// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

}  // namespace chartfolio::fixtures
