#include "chartfolio/classifier.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <cmath>

#include "chartfolio/csv.hpp"

namespace chartfolio {

ChannelMatrix::ChannelMatrix(const Matrix3& probs) : probs_(probs) {
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (!(probs_(i, j) >= 0.0 && probs_(i, j) <= 1.0)) {
        throw InputError("channel entries must lie in [0, 1]");
      }
    }
    if (std::abs(probs_.row(i).sum() - 1.0) > 1e-12) {
      throw InputError("channel row " + std::to_string(i) + " does not sum to 1");
    }
  }
}

ChannelMatrix ChannelMatrix::from_counts(const Matrix3& counts) {
  if ((counts.array() < 0).any()) throw InputError("channel counts must be non-negative");
  Matrix3 p;
  for (int i = 0; i < 3; ++i) {
    const double total = counts.row(i).sum();
    if (!(total > 0)) throw InputError("channel row " + std::to_string(i) + " has no counts");
    p.row(i) = counts.row(i) / total;
  }
  return ChannelMatrix(p);
}

ChannelMatrix ChannelMatrix::from_config(const KvConfig& cfg) {
  Matrix3 m;
  for (int i = 0; i < 3; ++i) {
    const auto row = cfg.get_doubles("row" + std::to_string(i));
    if (row.size() != 3) throw InputError("channel row" + std::to_string(i) + ": expected 3 values");
    for (int j = 0; j < 3; ++j) m(i, j) = row[j];
  }
  const std::string kind = cfg.find("kind").value_or("probs");
  if (kind == "counts") return from_counts(m);
  if (kind != "probs") throw InputError("channel kind must be probs or counts");
  return ChannelMatrix(m);
}

ClassLabel channel_classify(ClassLabel truth, const ChannelMatrix& channel, RngStream& rng) {
  const Vector3 row = channel.row(truth);
  const double u = rng.uniform();
  double cumulative = 0.0;
  int last_positive = 0;
  for (int j = 0; j < 3; ++j) {
    if (row[j] > 0) last_positive = j;
    cumulative += row[j];
    if (u < cumulative) return label_from_index(j);
  }
  // Rounding left the cumulative sum a hair under u.
  return label_from_index(last_positive);
}

ConfidenceModel ConfidenceModel::from_config(const KvConfig& cfg) {
  ConfidenceModel m;
  m.beta_a = cfg.get_double("confidence_a", m.beta_a);
  m.beta_b = cfg.get_double("confidence_b", m.beta_b);
  if (!(m.beta_a > 0 && m.beta_b > 0)) throw InputError("confidence_a/b must be positive");
  return m;
}

Vector3 synthesize_softmax(ClassLabel predicted, const Vector3& channel_row,
                           const ConfidenceModel& confidence, RngStream& rng) {
  const double u = rng.uniform_open();
  const double conf =
      1.0 / 3.0 + (2.0 / 3.0) * boost::math::ibeta_inv(confidence.beta_a, confidence.beta_b, u);
  const int p = index_of(predicted);
  const int o1 = (p + 1) % 3;
  const int o2 = (p + 2) % 3;
  const double rest = 1.0 - conf;
  const double w1 = channel_row[o1], w2 = channel_row[o2];
  Vector3 out;
  out[p] = conf;
  if (w1 + w2 > 0) {
    out[o1] = rest * w1 / (w1 + w2);
    out[o2] = rest * w2 / (w1 + w2);
  } else {
    out[o1] = out[o2] = rest / 2;
  }
  if (!(out[o1] < conf && out[o2] < conf)) out[o1] = out[o2] = rest / 2;
  return out;
}

std::vector<PredictionRecord> simulate_channel(std::span<const LabeledInput> inputs,
                                               const ChannelMatrix& channel,
                                               const ConfidenceModel& confidence,
                                               std::uint64_t seed) {
  std::vector<PredictionRecord> out;
  out.reserve(inputs.size());
  for (const auto& in : inputs) {
    auto rng = RngStream::derive(seed, "classify", in.sample_id);
    PredictionRecord r;
    r.sample_id = in.sample_id;
    r.true_label = in.true_label;
    r.yield = in.yield;
    const ClassLabel predicted = channel_classify(in.true_label, channel, rng);
    r.softmax = synthesize_softmax(predicted, channel.row(in.true_label), confidence, rng);
    r.predicted = predicted;
    out.push_back(std::move(r));
  }
  return out;
}

ReplayResult replay_parse(const std::string& text) {
  const auto table = CsvTable::parse(text);
  table.require({"sample_id", "true_label", "prob0", "prob1", "prob2"});
  const auto c_id = table.column("sample_id"), c_t = table.column("true_label");
  const std::size_t c_p[3] = {table.column("prob0"), table.column("prob1"), table.column("prob2")};
  const bool has_pred = table.has_column("predicted");
  const bool has_yield = table.has_column("yield");
  ReplayResult out;
  for (const auto& row : table.rows()) {
    auto report = [&](const std::string& m) { out.errors.push_back({row.line, m}); };
    if (row.fields.size() != table.header().size()) {
      report("wrong field count");
      continue;
    }
    PredictionRecord r;
    r.sample_id = row.fields[c_id];
    if (r.sample_id.empty()) {
      report("missing sample_id");
      continue;
    }
    const auto truth = parse_label(row.fields[c_t]);
    if (!truth) {
      report("bad true_label");
      continue;
    }
    r.true_label = *truth;
    bool ok = true;
    for (int k = 0; k < 3; ++k) {
      const auto v = parse_double(row.fields[c_p[k]]);
      if (!v || !(*v >= 0.0) || !std::isfinite(*v)) {
        ok = false;
        break;
      }
      r.softmax[k] = *v;
    }
    if (!ok) {
      report("probabilities must be finite and non-negative");
      continue;
    }
    const double sum = r.softmax.sum();
    if (std::abs(sum - 1.0) > kReplaySimplexTolerance) {
      report("probabilities sum to " + format_double(sum) + ", not 1");
      continue;
    }
    r.softmax /= sum;
    if (has_pred) {
      const auto& f = row.fields[table.column("predicted")];
      if (!f.empty()) {
        const auto p = parse_label(f);
        if (!p) {
          report("bad predicted label");
          continue;
        }
        r.predicted = *p;
      }
    }
    if (has_yield) {
      const auto& f = row.fields[table.column("yield")];
      if (!f.empty()) {
        const auto y = parse_double(f);
        if (!y || !(*y > 0)) {
          report("bad yield");
          continue;
        }
        r.yield = *y;
      }
    }
    out.records.push_back(std::move(r));
  }
  return out;
}

ReplayResult replay_load(const std::filesystem::path& path) {
  try {
    return replay_parse(read_text_file(path));
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

std::string serialize_records_csv(std::span<const PredictionRecord> records) {
  std::string out = "sample_id,true_label,prob0,prob1,prob2,predicted,yield\n";
  for (const auto& r : records) {
    out += r.sample_id + "," + to_string(r.true_label);
    for (int k = 0; k < 3; ++k) out += "," + format_double(r.softmax[k]);
    out += "," + (r.predicted ? to_string(*r.predicted) : std::string());
    out += "," + (r.yield ? format_double(*r.yield) : std::string()) + "\n";
  }
  return out;
}

ClassLabel argmax_classify(const Vector3& softmax) {
  int best = 0;
  for (int k = 1; k < 3; ++k) {
    if (softmax[k] > softmax[best]) best = k;
  }
  return label_from_index(best);
}

ApprovalThreshold::ApprovalThreshold(double alpha) : alpha_(alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must lie in (0, 1)");
}

FilterResult alpha_filter(std::span<const PredictionRecord> records, ApprovalThreshold alpha) {
  FilterResult out;
  for (const auto& r : records) {
    PredictionRecord copy = r;
    if (r.softmax.maxCoeff() >= alpha.alpha()) {
      copy.predicted = argmax_classify(r.softmax);
      out.classified.push_back(std::move(copy));
    } else {
      copy.predicted.reset();
      out.abstained.push_back(std::move(copy));
    }
  }
  return out;
}

}  // namespace chartfolio
