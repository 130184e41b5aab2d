#include "chartfolio/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "chartfolio/csv.hpp"
#include "chartfolio/dataset.hpp"

namespace chartfolio {

ConfusionCounts confusion(std::span<const PredictionRecord> records) {
  ConfusionCounts cm = ConfusionCounts::Zero();
  for (const auto& r : records) {
    if (!r.predicted) throw InputError("confusion: record " + r.sample_id + " has no prediction");
    ++cm(index_of(r.true_label), index_of(*r.predicted));
  }
  return cm;
}

ClassMetrics metrics(const ConfusionCounts& cm) {
  ClassMetrics m;
  const std::int64_t total = cm.sum();
  m.accuracy = total > 0 ? static_cast<double>(cm.trace()) / static_cast<double>(total) : 0.0;
  for (int j = 0; j < 3; ++j) {
    const std::int64_t col = cm.col(j).sum();
    const std::int64_t row = cm.row(j).sum();
    m.support[j] = row;
    m.degenerate[j] = col == 0 || row == 0;
    m.precision[j] = col > 0 ? static_cast<double>(cm(j, j)) / static_cast<double>(col) : 0.0;
    m.recall[j] = row > 0 ? static_cast<double>(cm(j, j)) / static_cast<double>(row) : 0.0;
    const double s = m.precision[j] + m.recall[j];
    m.f1[j] = s > 0 ? 2.0 * m.precision[j] * m.recall[j] / s : 0.0;
  }
  return m;
}

Vector3 predicted_pool_weights(const ConfusionCounts& cm, ClassLabel column) {
  const auto col = cm.col(index_of(column)).cast<double>();
  const double total = col.sum();
  if (!(total > 0)) throw InputError("predicted_pool_weights: empty prediction column");
  return col / total;
}

Vector3 buy_rates(const ConfusionCounts& cm, ClassLabel column) {
  Vector3 out;
  for (int i = 0; i < 3; ++i) {
    const double row = static_cast<double>(cm.row(i).sum());
    out[i] = row > 0 ? static_cast<double>(cm(i, index_of(column))) / row : 0.0;
  }
  return out;
}

double expected_yield(const Vector3& weights, const Vector3& mean_yields) {
  if ((weights.array() < -1e-9).any() || std::abs(weights.sum() - 1.0) > 1e-9) {
    throw InputError("expected_yield: weights are not on the simplex");
  }
  return weights.dot(mean_yields);
}

std::string format_confusion_table(const ConfusionCounts& cm) {
  std::string out = "True / Prediction,0,1,2,SUM\n";
  for (int i = 0; i < 3; ++i) {
    out += std::to_string(i);
    for (int j = 0; j < 3; ++j) out += "," + std::to_string(cm(i, j));
    out += "," + std::to_string(cm.row(i).sum()) + "\n";
  }
  out += "SUM";
  for (int j = 0; j < 3; ++j) out += "," + std::to_string(cm.col(j).sum());
  return out + "," + std::to_string(cm.sum()) + "\n";
}

std::string format_metrics_table(const ClassMetrics& m) {
  std::string out = ",precision,recall,f1-score,support\n";
  for (int j = 0; j < 3; ++j) {
    out += std::to_string(j) + "," + format_fixed(m.precision[j], 2) + "," +
           format_fixed(m.recall[j], 2) + "," + format_fixed(m.f1[j], 2) + "," +
           std::to_string(m.support[j]) + (m.degenerate[j] ? ",degenerate" : "") + "\n";
  }
  return out + "accuracy," + format_fixed(m.accuracy, 4) + "\n";
}

void BinningConfig::validate() const {
  if (!(m > 0)) throw InputError("binning increment m must be positive");
  if (!(winsor_lo < winsor_hi)) throw InputError("winsor_lo must be below winsor_hi");
}

double winsorize(double x, const BinningConfig& cfg) {
  return std::clamp(x, cfg.winsor_lo, cfg.winsor_hi);
}

std::int64_t bin_index(double x, double m) {
  double q = x / m;
  const double twice = 2.0 * q;
  const double nearest_half = std::round(twice);
  if (std::abs(twice - nearest_half) < 1e-9 * std::max(1.0, std::abs(twice))) q = nearest_half / 2.0;
  return static_cast<std::int64_t>(std::round(q));
}

double bin_yield(double x, const BinningConfig& cfg) {
  if (!(cfg.m > 0)) throw InputError("binning increment m must be positive");
  return static_cast<double>(bin_index(x, cfg.m)) * cfg.m;
}

std::map<std::int64_t, BinProportions> proportions_per_yield(
    std::span<const PredictionRecord> records, const BinningConfig& cfg,
    std::optional<ClassLabel> true_class) {
  cfg.validate();
  std::map<std::int64_t, BinProportions> bins;
  for (const auto& r : records) {
    if (true_class && r.true_label != *true_class) continue;
    if (!r.yield) throw InputError("proportions_per_yield: record " + r.sample_id + " has no yield");
    if (!r.predicted) throw InputError("proportions_per_yield: record " + r.sample_id + " is unclassified");
    const std::int64_t k = bin_index(winsorize(*r.yield, cfg), cfg.m);
    auto& b = bins[k];
    b.yield = static_cast<double>(k) * cfg.m;
    ++b.count;
    b.counts[index_of(*r.predicted)] += 1.0;
  }
  for (auto& [k, b] : bins) b.proportions = b.counts / static_cast<double>(b.count);
  return bins;
}

RegressionFit ols_fit(std::span<const double> x, std::span<const double> y) {
  const Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(y.size()));
  return ols_fit<double>(Eigen::VectorXd(xv), Eigen::VectorXd(yv));
}

AlphaSweepCurve alpha_sweep(std::span<const PredictionRecord> records,
                            std::span<const double> alphas) {
  // Sort maxima once; each alpha is then a binary search plus a suffix count.
  struct Item {
    double max_prob;
    bool c1;
    bool correct;
  };
  std::vector<Item> items;
  items.reserve(records.size());
  for (const auto& r : records) {
    const ClassLabel p = argmax_classify(r.softmax);
    items.push_back({r.softmax.maxCoeff(), p == ClassLabel::C1, p == r.true_label});
  }
  std::sort(items.begin(), items.end(),
            [](const Item& a, const Item& b) { return a.max_prob < b.max_prob; });
  std::vector<std::size_t> c1_suffix(items.size() + 1, 0), correct_suffix(items.size() + 1, 0);
  for (std::size_t i = items.size(); i-- > 0;) {
    c1_suffix[i] = c1_suffix[i + 1] + items[i].c1;
    correct_suffix[i] = correct_suffix[i + 1] + items[i].correct;
  }

  AlphaSweepCurve curve;
  const std::size_t total = records.size();
  for (double alpha : alphas) {
    const auto first = std::lower_bound(items.begin(), items.end(), alpha,
                                        [](const Item& it, double a) { return it.max_prob < a; });
    const auto start = static_cast<std::size_t>(first - items.begin());
    AlphaSweepPoint pt;
    pt.alpha = alpha;
    pt.total = total;
    pt.classified = total - start;
    pt.c1_count = c1_suffix[start];
    pt.correct = correct_suffix[start];
    pt.classified_fraction = total ? static_cast<double>(pt.classified) / static_cast<double>(total) : 0.0;
    pt.c1_fraction = total ? static_cast<double>(pt.c1_count) / static_cast<double>(total) : 0.0;
    pt.correct_defined = pt.classified > 0;
    pt.correct_fraction = pt.correct_defined
                              ? static_cast<double>(pt.correct) / static_cast<double>(pt.classified)
                              : std::numeric_limits<double>::quiet_NaN();
    curve.push_back(pt);
  }
  return curve;
}

std::vector<double> parse_alpha_grid(const std::string& spec) {
  const auto parts = split(spec, ':');
  if (parts.size() != 3) throw InputError("alpha grid must be lo:hi:step");
  const auto lo = parse_double(parts[0]), hi = parse_double(parts[1]), step = parse_double(parts[2]);
  if (!lo || !hi || !step || !(*step > 0) || !(*hi >= *lo) || !(*lo > 0) || !(*hi < 1)) {
    throw InputError("alpha grid must satisfy 0 < lo <= hi < 1 and step > 0");
  }
  const auto count = static_cast<std::size_t>(std::floor((*hi - *lo) / *step + 1e-9)) + 1;
  std::vector<double> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    // Round to 12 decimals so grid points print and compare as written.
    out.push_back(std::round((*lo + static_cast<double>(i) * *step) * 1e12) / 1e12);
  }
  return out;
}

AlphaStarResult alpha_star_search(const AlphaSweepCurve& curve, double gamma1, double gamma0) {
  if (curve.size() < 5) throw InputError("alpha_star_search: need at least 5 curve points");
  AlphaStarResult out;
  const std::size_t n = curve.size();
  out.expected.resize(n);
  out.first_order_condition.assign(n, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = curve[i];
    const double g = p.correct_defined ? p.correct_fraction : 0.0;
    out.expected[i] = p.classified_fraction * (g * gamma1 + (1.0 - g) * gamma0);
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const auto &a = curve[i - 1], &b = curve[i], &c = curve[i + 1];
    if (!(a.correct_defined && b.correct_defined && c.correct_defined)) continue;
    const double f = b.classified_fraction, g = b.correct_fraction;
    if (!(f > 0 && g > 0)) continue;
    const double h = c.alpha - a.alpha;
    const double df = (c.classified_fraction - a.classified_fraction) / h;
    const double dg = (c.correct_fraction - a.correct_fraction) / h;
    out.first_order_condition[i] = df / f + dg / g;
  }
  const double best = *std::max_element(out.expected.begin(), out.expected.end());
  const double worst = *std::min_element(out.expected.begin(), out.expected.end());
  const double tol = 1e-12 * std::max(1.0, std::abs(best));
  out.best_value = best;
  out.flat = best - worst <= tol;
  for (std::size_t i = 0; i < n; ++i) {
    if (out.expected[i] >= best - tol) {
      out.maximizers.push_back(i);
      out.alphas.push_back(curve[i].alpha);
    }
  }
  return out;
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

DistStats dist_stats(std::span<const double> values, double increment) {
  if (values.size() < 2) throw InputError("dist_stats: need at least 2 values");
  if (!(increment > 0)) throw InputError("dist_stats: increment must be positive");
  DistStats s;
  s.n = values.size();
  s.increment = increment;
  const auto base = describe(std::vector<double>(values.begin(), values.end()));
  s.mean = base.mean;
  s.median = base.median;
  s.stdev = base.stdev;
  s.min = base.min;
  s.max = base.max;
  s.q1 = base.q1;
  s.q3 = base.q3;
  double m2 = 0, m3 = 0;
  for (double v : values) {
    const double d = v - s.mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= static_cast<double>(s.n);
  m3 /= static_cast<double>(s.n);
  s.skewness_defined = m2 > 0;
  s.skewness = s.skewness_defined ? m3 / std::pow(m2, 1.5) : std::numeric_limits<double>::quiet_NaN();
  for (double v : values) ++s.histogram[bin_index(v, increment)];
  return s;
}

}  // namespace chartfolio
