#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <set>

#include "chartfolio/csv.hpp"
#include "chartfolio/dataset.hpp"
#include "cli.hpp"
#include "support.hpp"

using namespace chartfolio;
namespace fs = std::filesystem;

namespace {

int run(std::vector<std::string> args) { return cli::run(args); }

// 30 sessions over 10 days and 3 tickers; day 5 of ticker C is missing its
// last bar.
fs::path write_bars(const fs::path& dir) {
  std::string text;
  bool first = true;
  RngStream rng(99, 0);
  for (const char* t : {"A", "B", "C"}) {
    for (int d = 3; d <= 14; ++d) {
      if (d == 8 || d == 9) continue;  // weekend
      char date[16];
      std::snprintf(date, sizeof date, "2022-01-%02d", d);
      std::vector<double> closes;
      double p = 50 + 50 * rng.uniform();
      const double drift = (rng.uniform() - 0.5) * 0.002;
      for (int i = 0; i < 78; ++i) {
        p *= 1 + drift + 0.002 * (rng.uniform() - 0.5);
        closes.push_back(std::round(p * 100) / 100);
      }
      if (std::string(t) == "C" && d == 5) closes.pop_back();
      text += fixtures::session_csv(t, date, closes, first);
      first = false;
    }
  }
  write_text_file(dir / "bars.csv", text);
  return dir / "bars.csv";
}

std::string slurp(const fs::path& p) { return read_text_file(p); }

}  // namespace

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({"bogus"}), cli::kExitUsage);
  EXPECT_EQ(run({}), cli::kExitUsage);
  EXPECT_EQ(run({"mc", "--nope"}), cli::kExitUsage);
  EXPECT_EQ(run({"--help"}), cli::kExitOk);
}

TEST(Cli, InputErrors) {
  const auto root = fixtures::scratch_dir("cli_input");
  EXPECT_EQ(run({"mc", "--config", (root / "missing.cfg").string(), "--out", (root / "o").string()}),
            cli::kExitInput);
  write_text_file(root / "bad.csv", "sample_id,true_label,prob0,prob1,prob2\nA,0,0.5,0.5,0.5\n");
  EXPECT_EQ(run({"analyze", "--records", (root / "bad.csv").string(), "--out", (root / "a").string()}),
            cli::kExitInput);
}

TEST(Cli, McIsDeterministic) {
  const auto root = fixtures::scratch_dir("cli_mc");
  const std::string cfg = (fs::path(CHARTFOLIO_SOURCE_DIR) / "configs" / "exp1.cfg").string();
  ASSERT_EQ(run({"mc", "--config", cfg, "--seed", "42", "--reps", "300", "--out", (root / "a").string()}), 0);
  ASSERT_EQ(run({"mc", "--config", cfg, "--seed", "42", "--reps", "300", "--threads", "3", "--out",
                 (root / "b").string()}),
            0);
  EXPECT_EQ(slurp(root / "a" / "results.csv"), slurp(root / "b" / "results.csv"));
  const auto manifest = slurp(root / "a" / "manifest.txt");
  EXPECT_NE(manifest.find("seed=42"), std::string::npos);
  EXPECT_NE(manifest.find("config:"), std::string::npos);
  EXPECT_NE(manifest.find("output:results.csv=fnv1a64:"), std::string::npos);
  EXPECT_FALSE(fs::exists(root / "a" / ".chartfolio.lock"));
}

TEST(Cli, LockedDirectoryIsRefused) {
  const auto root = fixtures::scratch_dir("cli_lock");
  fs::create_directories(root / "o");
  write_text_file(root / "o" / ".chartfolio.lock", "");
  const std::string cfg = (fs::path(CHARTFOLIO_SOURCE_DIR) / "configs" / "exp1.cfg").string();
  EXPECT_EQ(run({"mc", "--config", cfg, "--reps", "10", "--out", (root / "o").string()}), cli::kExitInput);
}

TEST(Cli, DataDirResolvesRelativeInputs) {
  const auto root = fixtures::scratch_dir("cli_datadir");
  fs::copy_file(fs::path(CHARTFOLIO_SOURCE_DIR) / "configs" / "exp2.cfg", root / "exp2.cfg");
  setenv("CHARTFOLIO_DATA_DIR", root.c_str(), 1);
  const int rc = run({"mc", "--config", "exp2.cfg", "--reps", "20", "--out", (root / "o").string()});
  unsetenv("CHARTFOLIO_DATA_DIR");
  EXPECT_EQ(rc, 0);
}

TEST(Cli, FullPipeline) {
  const auto root = fixtures::scratch_dir("cli_pipeline");
  const auto bars = write_bars(root);
  const auto d = [&](const char* n) { return (root / n).string(); };

  ASSERT_EQ(run({"ingest", "--in", bars.string(), "--out", d("ingest"), "--tz", "America/New_York"}), 0);
  ASSERT_EQ(run({"render", "--sessions", d("ingest/sessions.csv"), "--out-dir", d("imgs")}), 0);
  EXPECT_TRUE(fs::exists(root / "imgs" / "A_2022-01-03.png"));
  EXPECT_FALSE(fs::exists(root / "imgs" / "C_2022-01-05.png"));

  ASSERT_EQ(run({"label", "--sessions", d("ingest/sessions.csv"), "--out", d("label")}), 0);
  const auto samples = load_samples_csv(root / "label" / "samples.csv");
  EXPECT_EQ(samples.size(), 29u);
  for (const auto& s : samples) EXPECT_NE(s.sample_id, "C:2022-01-05");
  EXPECT_NE(slurp(root / "label" / "skipped.txt").find("C:2022-01-05"), std::string::npos);

  ASSERT_EQ(run({"split", "--samples", d("label/samples.csv"), "--seed", "7", "--out", d("split")}), 0);
  EXPECT_EQ(load_samples_csv(root / "split" / "train.csv").size() +
                load_samples_csv(root / "split" / "validation.csv").size() +
                load_samples_csv(root / "split" / "test.csv").size(),
            29u);
  ASSERT_EQ(run({"summarize", "--samples", d("split/train.csv") + "," + d("split/test.csv"), "--out", d("sum")}), 0);

  const std::string channel = (fs::path(CHARTFOLIO_SOURCE_DIR) / "configs" / "table2_channel.cfg").string();
  ASSERT_EQ(run({"classify", "--mode", "channel", "--channel", channel, "--samples", d("label/samples.csv"),
                 "--seed", "3", "--out", d("cls")}),
            0);
  ASSERT_EQ(run({"classify", "--mode", "channel", "--channel", channel, "--samples", d("label/samples.csv"),
                 "--seed", "3", "--out", d("cls2")}),
            0);
  EXPECT_EQ(slurp(root / "cls" / "predictions.csv"), slurp(root / "cls2" / "predictions.csv"));
  ASSERT_EQ(run({"classify", "--mode", "replay", "--records", d("cls/predictions.csv"), "--samples",
                 d("label/samples.csv"), "--alpha", "0.6", "--out", d("replay")}),
            0);

  ASSERT_EQ(run({"analyze", "--records", d("cls/predictions.csv"), "--out", d("an")}), 0);
  for (const char* f : {"confusion.csv", "metrics.csv", "prediction_stats.csv", "fig_alpha_correct.csv",
                        "fig_alpha_all.csv", "fig_alpha_c1.csv", "alpha_star.txt", "manifest.txt"}) {
    EXPECT_TRUE(fs::exists(root / "an" / f)) << f;
  }
  EXPECT_EQ(slurp(root / "an" / "fig_alpha_all.csv").substr(0, 10), "alpha,all\n");

  ASSERT_EQ(run({"sweep-alpha", "--records", d("cls/predictions.csv"), "--alpha-grid", "0.34:0.9:0.01",
                 "--out", d("sweep")}),
            0);
  ASSERT_EQ(run({"backtest", "--opps", d("cls/opportunities.csv"), "--policy",
                 "all,predicted_c1,true_c1,random:0.33", "--mode", "both", "--beta", "1000", "--out", d("bt")}),
            0);
  EXPECT_TRUE(fs::exists(root / "bt" / "trading_table.csv"));
  EXPECT_TRUE(fs::exists(root / "bt" / "ledger_daily_random_0.33.csv"));

  // Nothing lands beside the output directories.
  std::set<std::string> top;
  for (const auto& e : fs::directory_iterator(root)) top.insert(e.path().filename().string());
  EXPECT_EQ(top, (std::set<std::string>{"bars.csv", "ingest", "imgs", "label", "split", "sum", "cls", "cls2",
                                        "replay", "an", "sweep", "bt"}));
}
