#include "chartfolio/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <tuple>

#include "chartfolio/csv.hpp"
#include "chartfolio/rng.hpp"

namespace chartfolio {

std::optional<ClassLabel> parse_label(std::string_view text) {
  std::string t = trim(text);
  if (t.size() == 2 && (t[0] == 'C' || t[0] == 'c')) t = t.substr(1);
  if (t == "0") return ClassLabel::C0;
  if (t == "1") return ClassLabel::C1;
  if (t == "2") return ClassLabel::C2;
  return std::nullopt;
}

ClassLabel label_sample(double p0, double pT) {
  if (!(p0 > 0) || !(pT > 0)) throw InputError("label_sample: prices must be positive");
  const double ratio = pT / p0;
  if (ratio >= kBuyThreshold) return ClassLabel::C1;
  if (ratio <= kSellThreshold) return ClassLabel::C2;
  return ClassLabel::C0;
}

std::string image_file_name(const std::string& ticker, const std::string& date) {
  return ticker + "_" + date + ".png";
}

LabelResult label_sessions(std::span<const TradingSession> sessions, const std::string& image_dir) {
  LabelResult out;
  std::set<std::string> seen;
  for (const auto& s : sessions) {
    if (!s.complete()) {
      std::string reason = s.valid ? "incomplete: " + std::to_string(s.bars.size()) + " of " +
                                         std::to_string(kBarsPerSession) + " bars"
                                   : "invalid rows";
      out.skipped.push_back({s.id(), reason});
      continue;
    }
    if (!seen.insert(s.id()).second) {
      out.skipped.push_back({s.id(), "duplicate ticker-day"});
      continue;
    }
    const auto ref = extract_reference_prices(s);
    LabeledSample sample;
    sample.sample_id = s.id();
    sample.ticker = s.ticker;
    sample.date = format_date(s.date);
    sample.p0 = ref.p0;
    sample.pT = ref.pT;
    sample.yield = ref.pT / ref.p0;
    sample.label = label_sample(ref.p0, ref.pT);
    const std::string file = image_file_name(sample.ticker, sample.date);
    sample.image_path = image_dir.empty() ? file : (std::filesystem::path(image_dir) / file).string();
    out.samples.push_back(std::move(sample));
  }
  return out;
}

DatasetSplit split_dataset(std::span<const LabeledSample> samples,
                           const std::array<double, 3>& fractions, std::uint64_t seed,
                           SplitMode mode) {
  if (samples.empty()) throw InputError("split_dataset: empty input");
  double total = 0;
  for (double f : fractions) {
    if (!(f >= 0)) throw InputError("split_dataset: fractions must be non-negative");
    total += f;
  }
  if (std::abs(total - 1.0) > 1e-9) throw InputError("split_dataset: fractions must sum to 1");

  const std::size_t n = samples.size();
  std::array<std::size_t, 3> sizes{};
  std::array<double, 3> remainders{};
  std::size_t assigned = 0;
  for (int i = 0; i < 3; ++i) {
    const double exact = fractions[i] * static_cast<double>(n);
    sizes[i] = static_cast<std::size_t>(std::floor(exact));
    remainders[i] = exact - static_cast<double>(sizes[i]);
    assigned += sizes[i];
  }
  std::array<int, 3> by_remainder{0, 1, 2};
  std::stable_sort(by_remainder.begin(), by_remainder.end(),
                   [&](int a, int b) { return remainders[a] > remainders[b]; });
  for (int k = 0; assigned < n; k = (k + 1) % 3) {
    if (fractions[by_remainder[k]] > 0) {
      ++sizes[by_remainder[k]];
      ++assigned;
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  if (mode == SplitMode::Chronological) {
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return std::tie(samples[a].date, samples[a].sample_id) <
             std::tie(samples[b].date, samples[b].sample_id);
    });
  } else {
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return samples[a].sample_id < samples[b].sample_id; });
    auto rng = RngStream::derive(seed, "split");
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  }

  DatasetSplit out;
  std::size_t pos = 0;
  const std::array<std::vector<LabeledSample>*, 3> parts{&out.train, &out.validation, &out.test};
  for (int i = 0; i < 3; ++i) {
    for (std::size_t k = 0; k < sizes[i]; ++k) parts[i]->push_back(samples[order[pos++]]);
  }
  return out;
}

std::vector<LabeledSample> balance_downsample(std::span<const LabeledSample> samples,
                                              const std::array<std::size_t, 3>& target_counts,
                                              std::uint64_t seed) {
  std::array<std::vector<std::size_t>, 3> members;
  for (std::size_t i = 0; i < samples.size(); ++i) members[index_of(samples[i].label)].push_back(i);
  std::vector<char> keep(samples.size(), 0);
  for (int c = 0; c < 3; ++c) {
    auto& m = members[c];
    if (target_counts[c] > m.size()) {
      throw InputError("balance_downsample: class " + std::to_string(c) + " target " +
                       std::to_string(target_counts[c]) + " exceeds available " +
                       std::to_string(m.size()));
    }
    auto rng = RngStream::derive(seed, "balance", static_cast<std::uint64_t>(c));
    // Partial Fisher-Yates: the first target_counts[c] entries are the survivors.
    for (std::size_t i = 0; i < target_counts[c]; ++i) {
      std::swap(m[i], m[i + rng.below(m.size() - i)]);
      keep[m[i]] = 1;
    }
  }
  std::vector<LabeledSample> out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (keep[i]) out.push_back(samples[i]);
  }
  return out;
}

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw InputError("quantile of empty data");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

YieldStats describe(std::vector<double> values) {
  YieldStats s;
  s.count = values.size();
  if (values.empty()) {
    const double nan = std::nan("");
    s.mean = s.median = s.stdev = s.min = s.max = s.q1 = s.q3 = nan;
    return s;
  }
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.stdev = values.size() > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
  s.min = values.front();
  s.max = values.back();
  s.median = quantile_sorted(values, 0.5);
  s.q1 = quantile_sorted(values, 0.25);
  s.q3 = quantile_sorted(values, 0.75);
  return s;
}

SummaryStats summarize(std::span<const LabeledSample> samples) {
  if (samples.empty()) throw InputError("summarize: empty sample set");
  std::vector<double> all;
  std::array<std::vector<double>, 3> per;
  for (const auto& s : samples) {
    all.push_back(s.yield);
    per[index_of(s.label)].push_back(s.yield);
  }
  SummaryStats out;
  out.overall = describe(std::move(all));
  for (int c = 0; c < 3; ++c) out.per_class[c] = describe(std::move(per[c]));
  return out;
}

std::string format_summary_table(std::span<const std::string> names,
                                 std::span<const SummaryStats> stats) {
  std::string out = "stat";
  for (const auto& name : names) {
    for (const char* col : {"ALL", "0", "1", "2"}) out += "," + name + ":" + col;
  }
  out += "\n";
  struct RowDef {
    const char* name;
    double YieldStats::*field;
  };
  const RowDef rows[] = {{"AVG", &YieldStats::mean},  {"MEDIAN", &YieldStats::median},
                         {"SD", &YieldStats::stdev},  {"MIN", &YieldStats::min},
                         {"MAX", &YieldStats::max},   {"Q1", &YieldStats::q1},
                         {"Q3", &YieldStats::q3}};
  for (const auto& row : rows) {
    out += row.name;
    for (const auto& s : stats) {
      out += "," + format_fixed(s.overall.*row.field, 3);
      for (const auto& c : s.per_class) out += "," + format_fixed(c.*row.field, 3);
    }
    out += "\n";
  }
  out += "N";
  for (const auto& s : stats) {
    out += "," + std::to_string(s.overall.count);
    for (const auto& c : s.per_class) out += "," + std::to_string(c.count);
  }
  return out + "\n";
}

std::string serialize_samples_csv(std::span<const LabeledSample> samples) {
  std::string out = "sample_id,ticker,date,p0,pT,yield,label,image_path\n";
  for (const auto& s : samples) {
    out += s.sample_id + "," + s.ticker + "," + s.date + "," + format_double(s.p0) + "," +
           format_double(s.pT) + "," + format_double(s.yield) + "," + to_string(s.label) + "," +
           s.image_path + "\n";
  }
  return out;
}

std::vector<LabeledSample> parse_samples_csv(const std::string& text) {
  const auto table = CsvTable::parse(text);
  table.require({"sample_id", "ticker", "date", "p0", "pT", "yield", "label"});
  const auto c_id = table.column("sample_id"), c_t = table.column("ticker"),
             c_d = table.column("date"), c_p0 = table.column("p0"), c_pT = table.column("pT"),
             c_y = table.column("yield"), c_l = table.column("label");
  const bool has_img = table.has_column("image_path");
  const std::size_t c_img = has_img ? table.column("image_path") : 0;
  std::vector<LabeledSample> out;
  for (const auto& row : table.rows()) {
    auto fail = [&](const std::string& why) {
      throw InputError("samples line " + std::to_string(row.line) + ": " + why);
    };
    if (row.fields.size() != table.header().size()) fail("wrong field count");
    LabeledSample s;
    s.sample_id = row.fields[c_id];
    if (s.sample_id.empty()) fail("missing sample_id");
    s.ticker = row.fields[c_t];
    s.date = row.fields[c_d];
    const auto p0 = parse_double(row.fields[c_p0]), pT = parse_double(row.fields[c_pT]),
               y = parse_double(row.fields[c_y]);
    const auto l = parse_label(row.fields[c_l]);
    if (!p0 || !pT || !y || !l) fail("unparsable value");
    if (!(*p0 > 0 && *pT > 0 && *y > 0)) fail("prices and yield must be positive");
    s.p0 = *p0;
    s.pT = *pT;
    s.yield = *y;
    s.label = *l;
    if (has_img) s.image_path = row.fields[c_img];
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<LabeledSample> load_samples_csv(const std::filesystem::path& path) {
  try {
    return parse_samples_csv(read_text_file(path));
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

}  // namespace chartfolio
