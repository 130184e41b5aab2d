#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chartfolio/kvconfig.hpp"
#include "chartfolio/rng.hpp"
#include "chartfolio/types.hpp"

namespace chartfolio {

using Matrix3 = Eigen::Matrix3d;
using Vector3 = Eigen::Vector3d;

/// Row-stochastic Pr(predict j | true i).
class ChannelMatrix {
 public:
  /// Throws InputError unless every entry is in [0, 1] and rows sum to 1
  /// within 1e-12.
  explicit ChannelMatrix(const Matrix3& probs);

  /// Normalizes each row of a confusion-count matrix.
  static ChannelMatrix from_counts(const Matrix3& counts);
  /// Keys row0, row1, row2 as comma lists. `kind=counts` normalizes rows.
  static ChannelMatrix from_config(const KvConfig& cfg);

  const Matrix3& probs() const { return probs_; }
  Vector3 row(ClassLabel truth) const { return probs_.row(index_of(truth)).transpose(); }

 private:
  Matrix3 probs_;
};

/// Inverse-CDF draw over the cumulative sums of the true-class row.
ClassLabel channel_classify(ClassLabel truth, const ChannelMatrix& channel, RngStream& rng);

struct PredictionRecord {
  std::string sample_id;
  ClassLabel true_label = ClassLabel::C0;
  Vector3 softmax = Vector3::Constant(1.0 / 3.0);
  std::optional<ClassLabel> predicted;
  /// pT / p0 when the record was joined with its sample.
  std::optional<double> yield;
};

/// Confidence given to the predicted class by the channel simulator:
/// 1/3 + (2/3) * Beta(a, b).
struct ConfidenceModel {
  double beta_a = 2.0;
  double beta_b = 2.0;

  static ConfidenceModel from_config(const KvConfig& cfg);
};

/// Synthetic softmax whose argmax is `predicted`. The remaining mass is split
/// in proportion to the channel row's other two entries, or evenly when that
/// split would overtake the predicted class.
Vector3 synthesize_softmax(ClassLabel predicted, const Vector3& channel_row,
                           const ConfidenceModel& confidence, RngStream& rng);

struct LabeledInput {
  std::string sample_id;
  ClassLabel true_label;
  std::optional<double> yield;
};

/// Channel-mode predictions. Each sample draws from its own stream keyed by
/// (seed, sample_id), so results do not depend on input order.
std::vector<PredictionRecord> simulate_channel(std::span<const LabeledInput> inputs,
                                               const ChannelMatrix& channel,
                                               const ConfidenceModel& confidence,
                                               std::uint64_t seed);

inline constexpr double kReplaySimplexTolerance = 1e-6;

struct ReplayRowError {
  std::size_t line = 0;
  std::string message;
};

struct ReplayResult {
  std::vector<PredictionRecord> records;
  std::vector<ReplayRowError> errors;
};

/// `sample_id,true_label,prob0,prob1,prob2` plus optional `predicted` and
/// `yield` columns. Rows whose probabilities are negative or do not sum to 1
/// within 1e-6 are reported; accepted rows are renormalized.
ReplayResult replay_parse(const std::string& text);
ReplayResult replay_load(const std::filesystem::path& path);

std::string serialize_records_csv(std::span<const PredictionRecord> records);

/// Index of the largest probability; ties go to the lowest class.
ClassLabel argmax_classify(const Vector3& softmax);
inline ClassLabel argmax_classify(const PredictionRecord& r) { return argmax_classify(r.softmax); }

class ApprovalThreshold {
 public:
  explicit ApprovalThreshold(double alpha);
  double alpha() const { return alpha_; }

 private:
  double alpha_;
};

struct FilterResult {
  std::vector<PredictionRecord> classified;
  std::vector<PredictionRecord> abstained;
};

/// Classified iff max softmax >= alpha; those get predicted = argmax.
FilterResult alpha_filter(std::span<const PredictionRecord> records, ApprovalThreshold alpha);

}  // namespace chartfolio
