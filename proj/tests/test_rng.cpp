#include <gtest/gtest.h>

#include <boost/math/distributions/normal.hpp>
#include <set>

#include "chartfolio/normal.hpp"
#include "chartfolio/rng.hpp"

using namespace chartfolio;

// Known-answer vectors for Philox4x32-10 from the Random123 distribution.
TEST(Philox, KnownAnswers) {
  using A4 = std::array<std::uint32_t, 4>;
  EXPECT_EQ(philox4x32({0, 0, 0, 0}, {0, 0}), (A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
            (A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
            (A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(RngStream, SameSeedSameSequence) {
  RngStream a(42, 7), b(42, 7);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
}

TEST(RngStream, StreamsDiffer) {
  RngStream a(42, 0), b(42, 1), c(43, 0);
  EXPECT_NE(a.next_u64(), b.next_u64());
  EXPECT_NE(RngStream(42, 0).next_u64(), c.next_u64());
  EXPECT_NE(RngStream::derive(1, "split").next_u64(), RngStream::derive(1, "balance").next_u64());
  EXPECT_NE(RngStream::derive(1, "mc", 0).next_u64(), RngStream::derive(1, "mc", 1).next_u64());
}

TEST(RngStream, DeriveIsStable) {
  auto a = RngStream::derive(9, "classify", std::string_view("AAPL:2022-01-14"));
  auto b = RngStream::derive(9, "classify", std::string_view("AAPL:2022-01-14"));
  EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(RngStream, UniformRange) {
  RngStream r(1, 2);
  double sum = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    const double v = r.uniform_open();
    ASSERT_GT(v, 0.0);
    ASSERT_LT(v, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / n, 0.5, 0.005);
}

TEST(RngStream, BelowIsUnbiasedAndInRange) {
  RngStream r(5, 5);
  std::array<int, 7> counts{};
  const int n = 70000;
  for (int i = 0; i < n; ++i) {
    const auto k = r.below(7);
    ASSERT_LT(k, 7u);
    ++counts[k];
  }
  double chi2 = 0;
  for (int c : counts) chi2 += (c - n / 7.0) * (c - n / 7.0) / (n / 7.0);
  EXPECT_LT(chi2, 22.46);  // chi-square 6 df, 0.001 level
  EXPECT_EQ(r.below(1), 0u);
}

TEST(Normal, QuantileMatchesBoost) {
  const boost::math::normal_distribution<double> nd;
  for (double p : {1e-12, 1e-6, 0.001, 0.02425, 0.1, 0.3, 0.5, 0.7, 0.9, 0.97575, 0.999, 1 - 1e-9}) {
    EXPECT_NEAR(normal_quantile(p), boost::math::quantile(nd, p), 1e-9 * std::max(1.0, std::abs(normal_quantile(p))))
        << p;
  }
  EXPECT_NEAR(normal_cdf(1.96), 0.9750021048517795, 1e-14);
  EXPECT_NEAR(normal_sf(1.96), 1 - 0.9750021048517795, 1e-14);
  EXPECT_NEAR(normal_pdf(0), 0.3989422804014327, 1e-15);
}
