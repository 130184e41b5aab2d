#include <gtest/gtest.h>

#include <boost/math/distributions/normal.hpp>

#include "chartfolio/montecarlo.hpp"

using namespace chartfolio;

namespace {

const TruncNormalSpec kClass1{0.03, 0.015, 0.02, 0.15};
const TruncNormalSpec kClass2{0.0, 0.01, -0.02, 0.02};
const TruncNormalSpec kClass3{-0.03, 0.015, -0.15, -0.02};

// Truncated-normal mean by Simpson's rule on the density.
double simpson_mean(const TruncNormalSpec& s) {
  const boost::math::normal_distribution<double> nd(s.mu, s.sigma);
  const int n = 20000;
  const double h = (s.b - s.a) / n;
  double num = 0, den = 0;
  for (int i = 0; i <= n; ++i) {
    const double x = s.a + h * i;
    const double w = (i == 0 || i == n) ? 1 : (i % 2 ? 4 : 2);
    num += w * x * boost::math::pdf(nd, x);
    den += w * boost::math::pdf(nd, x);
  }
  return num / den;
}

double ks_statistic(std::vector<double> v, const TruncNormalSpec& s) {
  const boost::math::normal_distribution<double> nd(s.mu, s.sigma);
  const double fa = boost::math::cdf(nd, s.a), fb = boost::math::cdf(nd, s.b);
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  double d = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double f = (boost::math::cdf(nd, v[i]) - fa) / (fb - fa);
    d = std::max({d, f - i / n, (i + 1) / n - f});
  }
  return d;
}

}  // namespace

TEST(TruncNormal, ClosedFormMean) {
  EXPECT_NEAR(kClass1.mean(), 0.0364, 1e-4);
  EXPECT_NEAR(kClass1.mean(), simpson_mean(kClass1), 1e-10);
  EXPECT_NEAR(kClass3.mean(), simpson_mean(kClass3), 1e-10);
  EXPECT_NEAR(kClass2.mean(), 0.0, 1e-15);
}

TEST(TruncNormal, SampleMeans) {
  RngStream rng(1, 0);
  const int n = 1000000;
  double s1 = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    s1 += sample_truncnorm(kClass1, rng);
    s2 += sample_truncnorm(kClass2, rng);
  }
  EXPECT_NEAR(s1 / n, 0.0364, 1e-4);
  EXPECT_NEAR(s2 / n, 0.0, 3e-5);
}

TEST(TruncNormal, BoundsAndKolmogorovSmirnov) {
  for (const auto& spec : {kClass1, kClass2, kClass3, TruncNormalSpec{0, 1, 4, 9}, TruncNormalSpec{0, 1, -9, -5}}) {
    RngStream rng(2, 0);
    std::vector<double> v(100000);
    for (auto& x : v) {
      x = sample_truncnorm(spec, rng);
      ASSERT_GE(x, spec.a);
      ASSERT_LE(x, spec.b);
    }
    EXPECT_LT(ks_statistic(v, spec), 1.9495 / std::sqrt(100000.0)) << spec.mu << " " << spec.a;
  }
}

TEST(TruncNormal, DegenerateAndInvalid) {
  RngStream rng(3, 0);
  const TruncNormalSpec tight{0.01, 1e-12, 0.0, 0.02};
  for (int i = 0; i < 100; ++i) EXPECT_NEAR(sample_truncnorm(tight, rng), 0.01, 1e-9);
  EXPECT_THROW((TruncNormalSpec{0, 1, 1, 1}.validate()), InputError);
  EXPECT_THROW((TruncNormalSpec{0, 0, -1, 1}.validate()), InputError);
  EXPECT_THROW(sample_truncnorm(TruncNormalSpec{0, 1, 60, 70}, rng), InputError);
}

TEST(Experiment, NoBuysKeepsWealth) {
  auto e = McExperiment::standard_setup(33, 10, 100);
  for (auto& c : e.classes) c.buy_prob = 0;
  e.repetitions = 200;
  for (double w : run_experiment(e).final_wealth) EXPECT_EQ(w, 1000.0);
  auto z = McExperiment::standard_setup(33, 10, 100);
  z.per_trade_cap = 0;
  z.repetitions = 200;
  for (double w : run_experiment(z).final_wealth) EXPECT_EQ(w, 1000.0);
}

TEST(Experiment, StandardExperiments) {
  const auto r1 = run_experiment(McExperiment::standard_setup(33, 10, 100));
  EXPECT_NEAR(r1.mean, 1003, 1003 * 0.015);
  EXPECT_LT(std::abs(r1.mean - 1000), 15.0);
  const auto r3 = run_experiment(McExperiment::standard_setup(50, 10, 300));
  EXPECT_NEAR(r3.mean, 361, 36.1);
  for (double w : r3.final_wealth) ASSERT_GE(w, 0.0);
}

TEST(Experiment, WorkerCountInvariance) {
  auto e = McExperiment::standard_setup(100, 10, 100);
  e.repetitions = 997;
  const auto a = run_experiment(e, 1);
  const auto b = run_experiment(e, 4);
  EXPECT_EQ(a.final_wealth, b.final_wealth);
  EXPECT_EQ(a.mean, b.mean);
  e.seed = 43;
  EXPECT_NE(run_experiment(e, 1).final_wealth, a.final_wealth);
}

TEST(Experiment, ConfigRoundTrip) {
  const auto e = McExperiment::standard_setup(50, 10, 300);
  const auto back = McExperiment::from_config(KvConfig::parse(e.to_config().serialize()));
  EXPECT_EQ(back.classes[2].count, 300u);
  EXPECT_EQ(back.classes[0].spec.b, 0.15);
  EXPECT_EQ(back.classes[1].buy_prob, 0.315);
  EXPECT_THROW(McExperiment::from_config(KvConfig::parse("class1.mu=0\n")), InputError);
}

TEST(BreakEven, Examples) {
  const auto sym = break_even_ratio({0.03, 0, -0.03, 0.5, 0.3, 0.5, 10, 100});
  EXPECT_NEAR(sym.ratio_n1_n3, 1.0, 1e-12);
  const auto std_rates = break_even_ratio({0.03, 0, -0.03, 0.572, 0.315, 0.187, 10, 100});
  EXPECT_NEAR(std_rates.ratio_n1_n3, 0.187 / 0.572, 1e-12);
  EXPECT_NEAR(std_rates.ratio_n1_n3, 0.327, 0.001);
  EXPECT_NEAR(std_rates.min_n1, 32.69, 0.01);
  const auto no3 = break_even_ratio({0.03, -0.01, 0.0, 0.5, 0.3, 0.2, 10, 100});
  EXPECT_NEAR(no3.min_n1, (0.01 * 0.3) / (0.03 * 0.5) * 10, 1e-12);
}
