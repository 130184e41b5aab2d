#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>

#include "chartfolio/analytics.hpp"
#include "chartfolio/backtest.hpp"
#include "chartfolio/chartgen.hpp"
#include "chartfolio/classifier.hpp"
#include "chartfolio/csv.hpp"
#include "chartfolio/dataset.hpp"
#include "chartfolio/figures.hpp"
#include "chartfolio/kvconfig.hpp"
#include "chartfolio/marketdata.hpp"
#include "chartfolio/montecarlo.hpp"
#include "chartfolio/rng.hpp"

namespace chartfolio::cli {

namespace fs = std::filesystem;

namespace {

std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string digest_file(const fs::path& p) { return "fnv1a64:" + hex64(fnv1a64(read_text_file(p))); }

/// Relative inputs that do not exist are looked up under CHARTFOLIO_DATA_DIR.
fs::path resolve_input(const std::string& raw) {
  fs::path p(raw);
  if (p.is_absolute() || fs::exists(p)) return p;
  if (const char* root = std::getenv("CHARTFOLIO_DATA_DIR"); root && *root) {
    const fs::path alt = fs::path(root) / p;
    if (fs::exists(alt)) return alt;
  }
  return p;
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// One run's output directory: holds a lock while the run is active and
/// receives the manifest at the end.
class OutputDir {
 public:
  OutputDir(const fs::path& dir, std::string command_line)
      : dir_(dir.empty() ? fs::path(".") : dir), command_(std::move(command_line)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw InputError("cannot create output directory " + dir_.string() + ": " + ec.message());
    lock_ = dir_ / ".chartfolio.lock";
    std::FILE* f = std::fopen(lock_.c_str(), "wx");
    if (!f) throw InputError("output directory is locked by another run: " + dir_.string());
    std::fclose(f);
  }
  ~OutputDir() {
    std::error_code ec;
    fs::remove(lock_, ec);
  }
  OutputDir(const OutputDir&) = delete;
  OutputDir& operator=(const OutputDir&) = delete;

  fs::path path(const std::string& name) const { return dir_ / name; }

  void write(const std::string& name, const std::string& contents) {
    write_text_file(path(name), contents);
    outputs_.push_back(name);
  }
  void note_output(const std::string& name) { outputs_.push_back(name); }
  void input(const fs::path& p) { inputs_.push_back(p); }
  void config(const fs::path& p) { configs_.push_back(p); }
  void seed(std::uint64_t s) { seeds_.insert(s); }

  void finish() {
    std::string m = "tool=chartfolio " CHARTFOLIO_VERSION "\n";
    m += "command=" + command_ + "\n";
    m += "timestamp=" + utc_now() + "\n";
    for (auto s : seeds_) m += "seed=" + std::to_string(s) + "\n";
    for (const auto& p : configs_) m += "config:" + p.string() + "=" + digest_file(p) + "\n";
    for (const auto& p : inputs_) m += "input:" + p.string() + "=" + digest_file(p) + "\n";
    for (const auto& o : outputs_) m += "output:" + o + "=" + digest_file(path(o)) + "\n";
    write_text_file(path("manifest.txt"), m);
  }

 private:
  fs::path dir_;
  fs::path lock_;
  std::string command_;
  std::vector<fs::path> inputs_, configs_;
  std::vector<std::string> outputs_;
  std::set<std::uint64_t> seeds_;
};

std::vector<fs::path> list_csv_inputs(const fs::path& in) {
  if (!fs::exists(in)) throw InputError("input does not exist: " + in.string());
  if (!fs::is_directory(in)) return {in};
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(in)) {
    if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw InputError("no .csv files in " + in.string());
  return files;
}

std::vector<TradingSession> load_sessions(const fs::path& p, const std::string& tz,
                                          std::vector<RowError>& errors) {
  BarSchema schema;
  schema.zone = tz;
  auto result = load_bars_csv(p, schema);
  errors.insert(errors.end(), result.errors.begin(), result.errors.end());
  return std::move(result.sessions);
}

std::array<double, 3> parse_triple(const std::string& text, const std::string& what) {
  const auto parts = split(text, ',');
  if (parts.size() != 3) throw InputError(what + ": expected three comma-separated values");
  std::array<double, 3> out{};
  for (int i = 0; i < 3; ++i) {
    const auto v = parse_double(parts[i]);
    if (!v) throw InputError(what + ": not a number: " + parts[i]);
    out[i] = *v;
  }
  return out;
}

std::vector<PredictionRecord> load_records(const fs::path& p) {
  auto replay = replay_load(p);
  if (!replay.errors.empty()) {
    std::string msg = p.string() + ": " + std::to_string(replay.errors.size()) + " invalid row(s)";
    for (std::size_t i = 0; i < std::min<std::size_t>(replay.errors.size(), 5); ++i) {
      msg += "\n  line " + std::to_string(replay.errors[i].line) + ": " + replay.errors[i].message;
    }
    throw InputError(msg);
  }
  return std::move(replay.records);
}

std::string regression_line(const std::string& name, const RegressionFit& f) {
  return name + "," + format_fixed(f.beta0, 4) + "," + format_fixed(f.p_value0, 4) + "," +
         format_fixed(f.beta1, 4) + "," + format_fixed(f.p_value1, 4) + "," +
         format_fixed(f.r_squared, 4) + "," + format_fixed(f.adj_r_squared, 4) + "," +
         std::to_string(f.n) + "\n";
}

const char* kRegressionHeader = "model,beta0,p_beta0,beta1,p_beta1,r2,adj_r2,n\n";

std::optional<RegressionFit> try_ols(const std::map<std::int64_t, BinProportions>& bins, int k) {
  std::vector<double> x, y;
  for (const auto& [key, b] : bins) {
    x.push_back(b.yield);
    y.push_back(b.proportions[k]);
  }
  try {
    return ols_fit(x, y);
  } catch (const InputError&) {
    return std::nullopt;
  }
}

void emit_alpha_outputs(OutputDir& out, std::span<const PredictionRecord> records,
                        const std::string& grid, double gamma1, double gamma0) {
  const auto alphas = parse_alpha_grid(grid);
  const auto curve = alpha_sweep(records, alphas);
  for (std::size_t i = 1; i < curve.size(); ++i) {
    if (curve[i].classified > curve[i - 1].classified) {
      throw InvariantError("alpha sweep: classified count increased with alpha");
    }
  }
  out.write("alpha_curve.csv", alpha_curve_csv(curve));
  out.write("fig_alpha_correct.csv", alpha_correct_csv(curve));
  out.write("fig_alpha_all.csv", alpha_all_csv(curve));
  out.write("fig_alpha_c1.csv", alpha_c1_csv(curve));
  if (curve.size() >= 5) {
    const auto star = alpha_star_search(curve, gamma1, gamma0);
    std::string s = "gamma1=" + format_double(gamma1) + "\ngamma0=" + format_double(gamma0) + "\n";
    s += "best_expected=" + format_double(star.best_value) + "\n";
    s += std::string("flat=") + (star.flat ? "true" : "false") + "\n";
    for (std::size_t i = 0; i < star.maximizers.size(); ++i) {
      const auto idx = star.maximizers[i];
      s += "alpha_star=" + format_double(star.alphas[i]) +
           " foc=" + format_double(star.first_order_condition[idx]) + "\n";
    }
    if (star.flat) std::cerr << "warning: expected-yield curve is flat; all grid points returned\n";
    out.write("alpha_star.txt", s);
  }
}

// ---------------------------------------------------------------------------

struct Common {
  std::string out;
  std::uint64_t seed = 42;
  std::string tz = "America/New_York";
};

int cmd_ingest(const std::string& in, const std::string& out_dir, const std::string& tz,
               const std::string& cmdline) {
  OutputDir out(out_dir, cmdline);
  std::vector<RowError> errors;
  std::vector<TradingSession> sessions;
  for (const auto& f : list_csv_inputs(resolve_input(in))) {
    out.input(f);
    auto s = load_sessions(f, tz, errors);
    sessions.insert(sessions.end(), std::make_move_iterator(s.begin()), std::make_move_iterator(s.end()));
  }
  std::sort(sessions.begin(), sessions.end(), [](const TradingSession& a, const TradingSession& b) {
    return std::tie(a.ticker, a.date) < std::tie(b.ticker, b.date);
  });
  out.write("sessions.csv", serialize_sessions_csv(sessions));
  std::string report;
  std::size_t complete = 0;
  for (const auto& e : errors) report += "row " + e.source + ":" + std::to_string(e.line) + ": " + e.message + "\n";
  for (const auto& s : sessions) {
    if (s.complete()) ++complete;
    for (const auto& issue : s.issues) report += "session " + s.id() + ": " + issue + "\n";
  }
  report += "sessions=" + std::to_string(sessions.size()) + " complete=" + std::to_string(complete) +
            " row_errors=" + std::to_string(errors.size()) + "\n";
  out.write("ingest_report.txt", report);
  if (!errors.empty()) std::cerr << errors.size() << " malformed row(s); see ingest report\n";
  out.finish();
  return kExitOk;
}

int cmd_render(const std::string& sessions_path, const std::string& out_dir,
               const std::string& spec_path, const std::string& tz, const std::string& cmdline) {
  OutputDir out(out_dir, cmdline);
  RenderSpec spec;
  if (!spec_path.empty()) {
    const auto p = resolve_input(spec_path);
    spec = RenderSpec::from_config(KvConfig::load(p));
    out.config(p);
  }
  const auto in = resolve_input(sessions_path);
  out.input(in);
  std::vector<RowError> errors;
  const auto sessions = load_sessions(in, tz, errors);
  std::string report;
  std::size_t rendered = 0;
  for (const auto& s : sessions) {
    if (!s.complete()) {
      report += "skip " + s.id() + ": incomplete or invalid session\n";
      continue;
    }
    const auto bars = slice_first_hour(s);
    const std::string name = image_file_name(s.ticker, format_date(s.date));
    encode_png(render_candles(bars, spec), out.path(name));
    out.note_output(name);
    ++rendered;
  }
  report += "rendered=" + std::to_string(rendered) + "\n";
  out.write("render_report.txt", report);
  out.write("render.cfg", spec.to_config().serialize());
  out.finish();
  return kExitOk;
}

int cmd_label(const std::string& sessions_path, const std::string& out_dir, const std::string& image_dir,
              const std::string& tz, const std::string& cmdline) {
  OutputDir out(out_dir, cmdline);
  const auto in = resolve_input(sessions_path);
  out.input(in);
  std::vector<RowError> errors;
  const auto sessions = load_sessions(in, tz, errors);
  const auto result = label_sessions(sessions, image_dir);
  out.write("samples.csv", serialize_samples_csv(result.samples));
  std::string skipped;
  for (const auto& s : result.skipped) {
    skipped += "skipped " + s.session_id + ": " + s.reason + "\n";
    std::cerr << "skipped " << s.session_id << ": " << s.reason << "\n";
  }
  out.write("skipped.txt", skipped);
  out.finish();
  return kExitOk;
}

int cmd_split(const std::string& samples_path, const std::string& fractions_text, std::uint64_t seed,
              const std::string& mode_text, const std::string& balance_text, const std::string& out_dir,
              const std::string& cmdline) {
  OutputDir out(out_dir, cmdline);
  out.seed(seed);
  const auto in = resolve_input(samples_path);
  out.input(in);
  const auto samples = load_samples_csv(in);
  SplitMode mode;
  if (mode_text == "random") mode = SplitMode::Random;
  else if (mode_text == "chronological") mode = SplitMode::Chronological;
  else throw InputError("--mode must be random or chronological");
  auto split_result = split_dataset(samples, parse_triple(fractions_text, "--fractions"), seed, mode);
  if (!balance_text.empty()) {
    const auto t = parse_triple(balance_text, "--balance-train");
    std::array<std::size_t, 3> targets{};
    for (int i = 0; i < 3; ++i) {
      if (t[i] < 0 || t[i] != std::floor(t[i])) throw InputError("--balance-train: counts must be whole");
      targets[i] = static_cast<std::size_t>(t[i]);
    }
    split_result.train = balance_downsample(split_result.train, targets, seed);
  }
  out.write("train.csv", serialize_samples_csv(split_result.train));
  out.write("validation.csv", serialize_samples_csv(split_result.validation));
  out.write("test.csv", serialize_samples_csv(split_result.test));
  out.write("split_report.txt", "mode=" + mode_text + "\nseed=" + std::to_string(seed) +
                                    "\ntrain=" + std::to_string(split_result.train.size()) +
                                    "\nvalidation=" + std::to_string(split_result.validation.size()) +
                                    "\ntest=" + std::to_string(split_result.test.size()) + "\n");
  out.finish();
  return kExitOk;
}

int cmd_summarize(const std::vector<std::string>& inputs, const std::string& out_dir,
                  const std::string& cmdline) {
  OutputDir out(out_dir, cmdline);
  std::vector<std::string> names;
  std::vector<SummaryStats> stats;
  for (const auto& raw : inputs) {
    const auto p = resolve_input(raw);
    out.input(p);
    names.push_back(p.stem().string());
    stats.push_back(summarize(load_samples_csv(p)));
  }
  const std::string table = format_summary_table(names, stats);
  out.write("summary.csv", table);
  std::cout << table;
  out.finish();
  return kExitOk;
}

int cmd_classify(const std::string& mode, const std::string& channel_path, const std::string& samples_path,
                 const std::string& records_path, std::optional<double> alpha, std::uint64_t seed,
                 const std::string& out_dir, const std::string& cmdline) {
  OutputDir out(out_dir, cmdline);
  std::vector<PredictionRecord> records;
  std::vector<LabeledSample> samples;
  if (!samples_path.empty()) {
    const auto p = resolve_input(samples_path);
    out.input(p);
    samples = load_samples_csv(p);
  }
  if (mode == "channel") {
    if (channel_path.empty()) throw InputError("--channel is required in channel mode");
    if (samples.empty()) throw InputError("--samples is required in channel mode");
    const auto cp = resolve_input(channel_path);
    out.config(cp);
    out.seed(seed);
    const auto cfg = KvConfig::load(cp);
    const auto channel = ChannelMatrix::from_config(cfg);
    const auto confidence = ConfidenceModel::from_config(cfg);
    std::vector<LabeledInput> inputs;
    for (const auto& s : samples) inputs.push_back({s.sample_id, s.label, s.yield});
    records = simulate_channel(inputs, channel, confidence, seed);
  } else if (mode == "replay") {
    if (records_path.empty()) throw InputError("--records is required in replay mode");
    const auto rp = resolve_input(records_path);
    out.input(rp);
    records = load_records(rp);
    std::map<std::string, double> yields;
    for (const auto& s : samples) yields[s.sample_id] = s.yield;
    for (auto& r : records) {
      r.predicted = argmax_classify(r);
      if (auto it = yields.find(r.sample_id); it != yields.end()) r.yield = it->second;
    }
  } else {
    throw InputError("--mode must be channel or replay");
  }

  if (alpha) {
    const auto filtered = alpha_filter(records, ApprovalThreshold(*alpha));
    std::map<std::string, ClassLabel> accepted;
    for (const auto& r : filtered.classified) accepted[r.sample_id] = *r.predicted;
    for (auto& r : records) {
      if (auto it = accepted.find(r.sample_id); it != accepted.end()) r.predicted = it->second;
      else r.predicted.reset();
    }
  }
  out.write("predictions.csv", serialize_records_csv(records));

  std::vector<PredictionRecord> classified;
  for (const auto& r : records) {
    if (r.predicted) classified.push_back(r);
  }
  const auto cm = confusion(classified);
  out.write("confusion.csv", format_confusion_table(cm));
  out.write("metrics.csv", format_metrics_table(metrics(cm)));

  if (!samples.empty()) {
    std::map<std::string, std::optional<ClassLabel>> preds;
    for (const auto& r : records) preds[r.sample_id] = r.predicted;
    std::vector<TradeOpportunity> opps;
    for (const auto& s : samples) {
      TradeOpportunity o{s.sample_id, s.date, s.p0, s.pT, std::nullopt, s.label};
      if (auto it = preds.find(s.sample_id); it != preds.end()) o.predicted = it->second;
      opps.push_back(std::move(o));
    }
    out.write("opportunities.csv", serialize_opportunities_csv(opps));
  }
  out.finish();
  return kExitOk;
}

int cmd_analyze(const std::string& records_path, const std::string& grid, double gamma1, double gamma0,
                const std::string& out_dir, const std::string& cmdline) {
  OutputDir out(out_dir, cmdline);
  const auto rp = resolve_input(records_path);
  out.input(rp);
  const auto records = load_records(rp);

  std::vector<PredictionRecord> classified;
  for (const auto& r : records) {
    if (r.predicted) classified.push_back(r);
  }
  const auto cm = confusion(classified);
  const auto m = metrics(cm);
  out.write("confusion.csv", format_confusion_table(cm));
  out.write("metrics.csv", format_metrics_table(m));

  std::vector<PredictionRecord> with_yield;
  for (const auto& r : classified) {
    if (r.yield) with_yield.push_back(r);
  }
  std::string notes;
  if (with_yield.size() != classified.size()) {
    notes += std::to_string(classified.size() - with_yield.size()) +
             " classified record(s) without yield excluded from yield analyses\n";
  }

  if (!with_yield.empty()) {
    // Per-prediction statistics and discretized distributions.
    std::string stats = "stat,C0,C1,C2\n";
    std::array<YieldStats, 3> per{};
    std::array<std::vector<double>, 3> by_pred;
    for (const auto& r : with_yield) by_pred[index_of(*r.predicted)].push_back(*r.yield);
    for (int k = 0; k < 3; ++k) per[k] = describe(by_pred[k]);
    struct Row {
      const char* name;
      double YieldStats::*field;
    };
    for (const Row& row : {Row{"AVG", &YieldStats::mean}, Row{"MEDIAN", &YieldStats::median},
                           Row{"SD", &YieldStats::stdev}, Row{"MIN", &YieldStats::min},
                           Row{"MAX", &YieldStats::max}, Row{"Q1", &YieldStats::q1},
                           Row{"Q3", &YieldStats::q3}}) {
      stats += row.name;
      for (int k = 0; k < 3; ++k) stats += "," + format_fixed(per[k].*row.field, 4);
      stats += "\n";
    }
    stats += "N," + std::to_string(per[0].count) + "," + std::to_string(per[1].count) + "," +
             std::to_string(per[2].count) + "\n";
    out.write("prediction_stats.csv", stats);

    std::string dist = "class,n,mean,median,stdev,skewness,q1,q3\n";
    for (int k = 0; k < 3; ++k) {
      if (by_pred[k].size() < 2) continue;
      const auto d = dist_stats(by_pred[k]);
      dist += "C" + std::to_string(k) + "," + std::to_string(d.n) + "," + format_double(d.mean) + "," +
              format_double(d.median) + "," + format_double(d.stdev) + "," +
              (d.skewness_defined ? format_double(d.skewness) : std::string()) + "," +
              format_double(d.q1) + "," + format_double(d.q3) + "\n";
      out.write("fig_dist_c" + std::to_string(k) + ".csv", histogram_csv(d));
    }
    out.write("distribution_stats.csv", dist);

    // Prediction shares per binned yield and the linear fits on them.
    const BinningConfig bins_cfg;
    const auto bins = proportions_per_yield(with_yield, bins_cfg);
    out.write("fig_class_predictions_yields.csv", proportions_csv(bins, "C"));
    std::string ols = kRegressionHeader;
    for (int k = 0; k < 3; ++k) {
      if (auto f = try_ols(bins, k)) ols += regression_line("y" + std::to_string(k), *f);
    }
    out.write("ols_proportions.csv", ols);

    std::string class_level = kRegressionHeader;
    for (int j = 0; j < 3; ++j) {
      const auto tb = proportions_per_yield(with_yield, bins_cfg, label_from_index(j));
      const std::string prefix = "t" + std::to_string(j) + "p";
      out.write("fig_class_level_t" + std::to_string(j) + ".csv", proportions_csv(tb, prefix));
      for (int k = 0; k < 3; ++k) {
        if (auto f = try_ols(tb, k)) {
          class_level += regression_line("T" + std::to_string(j) + "P" + std::to_string(k), *f);
        }
      }
    }
    out.write("ols_class_level.csv", class_level);

    std::vector<double> x;
    std::vector<ClassLabel> y;
    for (const auto& r : with_yield) {
      x.push_back(*r.yield);
      y.push_back(*r.predicted);
    }
    try {
      const auto fit = mnl_fit(x, y);
      const double mean_x = pairwise_sum(x) / static_cast<double>(x.size());
      out.write("mnl.csv", format_mnl_table(fit, mean_x));
      out.write("fig_class_probability.csv", class_probability_csv(fit.coef));
    } catch (const InputError& e) {
      notes += std::string("multinomial logit skipped: ") + e.what() + "\n";
    }
  }

  emit_alpha_outputs(out, records, grid, gamma1, gamma0);
  if (!notes.empty()) {
    out.write("notes.txt", notes);
    std::cerr << notes;
  }
  std::cout << format_confusion_table(cm) << format_metrics_table(m);
  out.finish();
  return kExitOk;
}

int cmd_sweep_alpha(const std::string& records_path, const std::string& grid, double gamma1, double gamma0,
                    const std::string& out_dir, const std::string& cmdline) {
  OutputDir out(out_dir, cmdline);
  const auto rp = resolve_input(records_path);
  out.input(rp);
  emit_alpha_outputs(out, load_records(rp), grid, gamma1, gamma0);
  out.finish();
  return kExitOk;
}

int cmd_mc(const std::string& config_path, std::optional<long long> reps, std::optional<std::uint64_t> seed,
           unsigned threads, const std::string& out_dir, const std::string& cmdline) {
  OutputDir out(out_dir, cmdline);
  const auto cp = resolve_input(config_path);
  out.config(cp);
  auto exp = McExperiment::from_config(KvConfig::load(cp));
  if (reps) {
    if (*reps <= 0) throw InputError("--reps must be positive");
    exp.repetitions = static_cast<std::size_t>(*reps);
  }
  if (seed) exp.seed = *seed;
  out.seed(exp.seed);
  const auto result = run_experiment(exp, threads);
  for (double w : result.final_wealth) {
    if (!(w >= 0)) throw InvariantError("Monte Carlo produced negative wealth");
  }
  std::string csv = mc_scatter_csv(result);
  csv += "mean," + format_double(result.mean) + "\n";
  out.write("results.csv", csv);
  std::string summary = "repetitions=" + std::to_string(exp.repetitions) + "\nseed=" + std::to_string(exp.seed) +
                        "\nmean=" + format_fixed(result.mean, 4) + "\nmedian=" + format_fixed(result.median, 4) +
                        "\nstdev=" + format_fixed(result.stdev, 4) + "\nmin=" + format_fixed(result.min, 4) +
                        "\nmax=" + format_fixed(result.max, 4) +
                        "\nmean_draw_yield=" + format_double(result.mean_draw_yield) +
                        "\nlinear_expectation=" + format_fixed(linear_expected_gain(exp), 4) + "\n";
  for (int j = 0; j < 3; ++j) {
    summary += "class" + std::to_string(j + 1) + "_mean=" + format_double(exp.classes[j].spec.mean()) + "\n";
  }
  out.write("summary.txt", summary);
  std::cout << summary;
  out.finish();
  return kExitOk;
}

int cmd_backtest(const std::string& opps_path, const std::string& policies_text, double v0,
                 const std::string& beta_text, const std::string& mode_text, std::uint64_t seed,
                 const std::string& out_dir, const std::string& cmdline) {
  OutputDir out(out_dir, cmdline);
  const auto op = resolve_input(opps_path);
  out.input(op);
  out.seed(seed);
  const auto opps = load_opportunities_csv(op);
  const auto beta = parse_double(beta_text);
  if (!beta) throw InputError("--beta must be a number or inf");
  std::vector<BacktestMode> modes;
  if (mode_text == "sequential") modes = {BacktestMode::Sequential};
  else if (mode_text == "daily") modes = {BacktestMode::DailyBatch};
  else if (mode_text == "both") modes = {BacktestMode::Sequential, BacktestMode::DailyBatch};
  else throw InputError("--mode must be sequential, daily or both");

  std::vector<BacktestReport> seq, daily;
  for (const auto& ptext : split(policies_text, ',')) {
    const auto policy = Policy::parse(trim(ptext));
    for (auto mode : modes) {
      BacktestConfig cfg{v0, *beta, policy, seed, mode};
      auto rep = run_backtest(opps, cfg);
      if (rep.trade_count != rep.ledger.size() || rep.final_wealth < 0) {
        throw InvariantError("backtest report violates its invariants");
      }
      std::string tag = (mode == BacktestMode::Sequential ? "sequential_" : "daily_") + policy.name();
      std::replace(tag.begin(), tag.end(), ':', '_');
      out.write("ledger_" + tag + ".csv", serialize_ledger_csv(rep));
      out.write("wealth_" + tag + ".csv", serialize_wealth_csv(rep));
      (mode == BacktestMode::Sequential ? seq : daily).push_back(std::move(rep));
    }
  }
  const std::string table = format_trading_table(seq, daily);
  out.write("trading_table.csv", table);
  std::cout << table;
  out.finish();
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"chartfolio: candlestick-chart samples, classifier evaluation and trading simulation"};
  app.name("chartfolio");
  app.require_subcommand(1);

  std::string cmdline = "chartfolio";
  for (const auto& a : args) cmdline += " " + a;

  // ingest
  std::string in_dir, tz = "America/New_York";
  std::string sessions_path, out_dir, spec_path;
  auto* ingest = app.add_subcommand("ingest", "Group 5-minute OHLCV rows into sessions");
  ingest->add_option("--in", in_dir, "Input CSV file or directory")->required();
  ingest->add_option("--out", out_dir, "Output directory for sessions.csv")->required();
  ingest->add_option("--tz", tz, "Exchange time zone");

  // render
  auto* render = app.add_subcommand("render", "Render first-hour candlestick PNGs");
  render->add_option("--sessions", sessions_path)->required();
  render->add_option("--out-dir,--out", out_dir)->required();
  render->add_option("--spec", spec_path, "RenderSpec key=value file");
  render->add_option("--tz", tz);

  // label
  std::string image_dir = "imgs";
  auto* label = app.add_subcommand("label", "Label complete sessions by the +/-2% rule");
  label->add_option("--sessions", sessions_path)->required();
  label->add_option("--out", out_dir)->required();
  label->add_option("--image-dir", image_dir, "Directory recorded in image_path");
  label->add_option("--tz", tz);

  // split
  std::string samples_path, fractions = "0.66,0.19,0.15", split_mode = "random", balance;
  std::uint64_t seed = 42;
  auto* split_cmd = app.add_subcommand("split", "Split samples into train/validation/test");
  split_cmd->add_option("--samples", samples_path)->required();
  split_cmd->add_option("--fractions", fractions);
  split_cmd->add_option("--seed", seed);
  split_cmd->add_option("--mode", split_mode, "random or chronological");
  split_cmd->add_option("--balance-train", balance, "Downsample train to n0,n1,n2");
  split_cmd->add_option("--out", out_dir)->required();

  // summarize
  std::vector<std::string> summarize_inputs;
  auto* summarize_cmd = app.add_subcommand("summarize", "Yield summary statistics per class");
  summarize_cmd->add_option("--samples", summarize_inputs)->required()->delimiter(',');
  summarize_cmd->add_option("--out", out_dir)->required();

  // classify
  std::string classify_mode, channel_path, records_path;
  std::optional<double> alpha;
  auto* classify = app.add_subcommand("classify", "Predictions from a confusion channel or a replay file");
  classify->add_option("--mode", classify_mode, "channel or replay")->required();
  classify->add_option("--channel", channel_path, "Channel key=value file");
  classify->add_option("--samples", samples_path);
  classify->add_option("--records", records_path, "Replay CSV");
  classify->add_option("--alpha", alpha, "Approval threshold");
  classify->add_option("--seed", seed);
  classify->add_option("--out", out_dir)->required();

  // analyze
  std::string grid = "0.34:0.95:0.005";
  double gamma1 = 0.0095, gamma0 = 0.0;
  auto* analyze = app.add_subcommand("analyze", "Metrics, distributions, regressions and alpha curves");
  analyze->add_option("--records", records_path)->required();
  analyze->add_option("--alpha-grid", grid);
  analyze->add_option("--gamma1", gamma1);
  analyze->add_option("--gamma0", gamma0);
  analyze->add_option("--out", out_dir)->required();

  // sweep-alpha
  auto* sweep = app.add_subcommand("sweep-alpha", "Approval-rate sweep and alpha* search");
  sweep->add_option("--records", records_path)->required();
  sweep->add_option("--alpha-grid", grid);
  sweep->add_option("--gamma1", gamma1);
  sweep->add_option("--gamma0", gamma0);
  sweep->add_option("--out", out_dir)->required();

  // mc
  std::string config_path;
  std::optional<long long> reps;
  std::optional<std::uint64_t> mc_seed;
  unsigned threads = 1;
  auto* mc = app.add_subcommand("mc", "Truncated-normal Monte Carlo experiment");
  mc->add_option("--config", config_path)->required();
  mc->add_option("--reps", reps);
  mc->add_option("--seed", mc_seed);
  mc->add_option("--threads", threads);
  mc->add_option("--out", out_dir)->required();

  // backtest
  std::string opps_path, policy = "predicted_c1", beta = "inf", bt_mode = "sequential";
  double v0 = 1000;
  auto* backtest = app.add_subcommand("backtest", "Trading simulation over opportunities");
  backtest->add_option("--opps", opps_path)->required();
  backtest->add_option("--policy", policy, "Comma list: all, predicted_c1, true_c1, random:<p>");
  backtest->add_option("--v0", v0);
  backtest->add_option("--beta", beta);
  backtest->add_option("--mode", bt_mode, "sequential, daily or both");
  backtest->add_option("--seed", seed);
  backtest->add_option("--out", out_dir)->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*ingest) return cmd_ingest(in_dir, out_dir, tz, cmdline);
    if (*render) return cmd_render(sessions_path, out_dir, spec_path, tz, cmdline);
    if (*label) return cmd_label(sessions_path, out_dir, image_dir, tz, cmdline);
    if (*split_cmd) return cmd_split(samples_path, fractions, seed, split_mode, balance, out_dir, cmdline);
    if (*summarize_cmd) return cmd_summarize(summarize_inputs, out_dir, cmdline);
    if (*classify) {
      return cmd_classify(classify_mode, channel_path, samples_path, records_path, alpha, seed, out_dir,
                          cmdline);
    }
    if (*analyze) return cmd_analyze(records_path, grid, gamma1, gamma0, out_dir, cmdline);
    if (*sweep) return cmd_sweep_alpha(records_path, grid, gamma1, gamma0, out_dir, cmdline);
    if (*mc) return cmd_mc(config_path, reps, mc_seed, threads, out_dir, cmdline);
    if (*backtest) return cmd_backtest(opps_path, policy, v0, beta, bt_mode, seed, out_dir, cmdline);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::logic_error& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInternal;
  }
  std::cerr << app.help();
  return kExitUsage;
}

}  // namespace chartfolio::cli
