#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "chartfolio/marketdata.hpp"
#include "chartfolio/types.hpp"

namespace chartfolio {

inline constexpr double kBuyThreshold = 1.02;
inline constexpr double kSellThreshold = 0.98;

/// C1 when pT/p0 >= 1.02, C2 when pT/p0 <= 0.98, otherwise C0.
ClassLabel label_sample(double p0, double pT);

struct LabeledSample {
  std::string sample_id;  ///< ticker:date
  std::string ticker;
  std::string date;
  double p0 = 0;
  double pT = 0;
  double yield = 0;  ///< pT / p0
  ClassLabel label = ClassLabel::C0;
  std::string image_path;
};

std::string image_file_name(const std::string& ticker, const std::string& date);

struct SkippedSession {
  std::string session_id;
  std::string reason;
};

struct LabelResult {
  std::vector<LabeledSample> samples;
  std::vector<SkippedSession> skipped;
};

/// One sample per complete session; everything else is reported as skipped.
LabelResult label_sessions(std::span<const TradingSession> sessions, const std::string& image_dir);

enum class SplitMode { Random, Chronological };

struct DatasetSplit {
  std::vector<LabeledSample> train, validation, test;
};

/// Sizes by largest remainder, so each subset is within 1 of fraction * N.
/// Random mode orders by sample_id and shuffles with the seeded stream;
/// chronological mode orders by (date, sample_id).
DatasetSplit split_dataset(std::span<const LabeledSample> samples,
                           const std::array<double, 3>& fractions, std::uint64_t seed,
                           SplitMode mode = SplitMode::Random);

/// Keeps target_counts[c] uniformly chosen samples of each class; survivors
/// keep their input order.
std::vector<LabeledSample> balance_downsample(std::span<const LabeledSample> samples,
                                              const std::array<std::size_t, 3>& target_counts,
                                              std::uint64_t seed);

struct YieldStats {
  std::size_t count = 0;
  double mean = 0, median = 0, stdev = 0, min = 0, max = 0, q1 = 0, q3 = 0;
};

struct SummaryStats {
  YieldStats overall;
  std::array<YieldStats, 3> per_class;
};

/// Linear interpolation between closest ranks on sorted data, q in [0, 1].
double quantile_sorted(std::span<const double> sorted, double q);

/// Sample standard deviation (n - 1 denominator; 0 for a single value).
YieldStats describe(std::vector<double> values);
SummaryStats summarize(std::span<const LabeledSample> samples);

/// Rows AVG..N with columns ALL, 0, 1, 2 for each named subset.
std::string format_summary_table(std::span<const std::string> names,
                                 std::span<const SummaryStats> stats);

std::string serialize_samples_csv(std::span<const LabeledSample> samples);
std::vector<LabeledSample> parse_samples_csv(const std::string& text);
std::vector<LabeledSample> load_samples_csv(const std::filesystem::path& path);

}  // namespace chartfolio
