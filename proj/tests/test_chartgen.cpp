#include <gtest/gtest.h>

#include <cmath>

#include "chartfolio/chartgen.hpp"
#include "support.hpp"

using namespace chartfolio;

namespace {

OhlcvBar bar(double o, double h, double l, double c, std::int64_t v) {
  OhlcvBar b;
  b.open = o;
  b.high = h;
  b.low = l;
  b.close = c;
  b.volume = v;
  return b;
}

// Eleven down candles spanning [100, 110] and one up candle (index 5) whose
// wick stays inside its body.
std::vector<OhlcvBar> one_up_fixture() {
  std::vector<OhlcvBar> bars;
  for (int i = 0; i < 12; ++i) bars.push_back(bar(106, 110, 100, 104, 500 + i));
  bars[5] = bar(102, 108, 102, 108, 700);
  return bars;
}

}  // namespace

TEST(Render, Deterministic) {
  RngStream rng(3, 0);
  const auto bars = fixtures::random_first_hour(rng);
  const auto a = render_candles(bars);
  const auto b = render_candles(bars);
  EXPECT_TRUE(a == b);
  EXPECT_EQ(encode_png(a), encode_png(b));
}

TEST(Render, UpBodyAreaMatchesLayoutArithmetic) {
  const RenderSpec spec;
  const auto img = render_candles(one_up_fixture(), spec);
  // Price pane: round(224 * 0.72) = 161 rows, so rows 0..160 map [110, 100].
  // Close 108 -> (110-108)/10*160 = 32, open 102 -> 128: 97 rows of a 14 px body.
  EXPECT_EQ(img.count(spec.up_color), 97u * 14u);
  // Slot = (224 - 12) / 12 = 17 px, first slot at 6 + (212 - 204) / 2 = 10,
  // body starts (17 - 14) / 2 = 1 px into the slot.
  const int left = 10 + 5 * 17 + 1;
  EXPECT_EQ(img.at(left, 32), spec.up_color);
  EXPECT_EQ(img.at(left + 13, 128), spec.up_color);
  EXPECT_NE(img.at(left - 1, 80), spec.up_color);
  EXPECT_NE(img.at(left + 14, 80), spec.up_color);
  EXPECT_NE(img.at(left, 31), spec.up_color);
  EXPECT_NE(img.at(left, 129), spec.up_color);
}

TEST(Render, FlatSessionDrawsMidlineBodies) {
  std::vector<OhlcvBar> bars(12, bar(50, 50, 50, 50, 100));
  const RenderSpec spec;
  const auto img = render_candles(bars, spec);
  const int mid = (161 - 1) / 2;
  EXPECT_EQ(img.count(spec.up_color), 12u * 14u);
  for (int k = 0; k < 12; ++k) {
    const int left = 10 + k * 17 + 1;
    for (int x = left; x < left + 14; ++x) {
      EXPECT_EQ(img.at(x, mid), spec.up_color);
      EXPECT_NE(img.at(x, mid - 1), spec.up_color);
      EXPECT_NE(img.at(x, mid + 1), spec.up_color);
    }
  }
}

TEST(Render, ScaleCovariance) {
  RngStream rng(11, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto bars = fixtures::random_first_hour(rng);
    auto scaled = bars;
    const double k = 0.01 + 50 * rng.uniform();
    const std::int64_t m = 1 + static_cast<std::int64_t>(rng.below(1000));
    for (auto& b : scaled) {
      b.open *= k;
      b.high *= k;
      b.low *= k;
      b.close *= k;
      b.volume *= m;
    }
    ASSERT_TRUE(render_candles(bars) == render_candles(scaled)) << "trial " << trial;
  }
}

TEST(Render, WickSpansLowToHigh) {
  RngStream rng(17, 0);
  const RenderSpec spec;
  for (int trial = 0; trial < 20; ++trial) {
    const auto bars = fixtures::random_first_hour(rng);
    const auto img = render_candles(bars, spec);
    double lo = bars[0].low, hi = bars[0].high;
    for (const auto& b : bars) {
      lo = std::min(lo, b.low);
      hi = std::max(hi, b.high);
    }
    for (int k = 0; k < 12; ++k) {
      const auto& b = bars[k];
      const Rgb c = b.close >= b.open ? spec.up_color : spec.down_color;
      const int x = 10 + k * 17 + 1 + 6;
      int top = -1, bottom = -1;
      for (int y = 0; y < 161; ++y) {
        if (img.at(x, y) == c) {
          if (top < 0) top = y;
          bottom = y;
        }
      }
      const double expect_top = (hi - b.high) / (hi - lo) * 160;
      const double expect_bottom = (hi - b.low) / (hi - lo) * 160;
      EXPECT_LE(std::abs(top - expect_top), 1.0);
      EXPECT_LE(std::abs(bottom - expect_bottom), 1.0);
    }
  }
}

TEST(Render, RejectsWrongBarCount) {
  std::vector<OhlcvBar> bars(11, bar(1, 2, 1, 2, 1));
  EXPECT_THROW(render_candles(bars), InputError);
}

TEST(Render, SpecConfigRoundTrip) {
  RenderSpec spec;
  spec.up_color = {1, 2, 3};
  spec.candle_body_width = 10;
  const auto back = RenderSpec::from_config(KvConfig::parse(spec.to_config().serialize()));
  EXPECT_EQ(back.up_color, spec.up_color);
  EXPECT_EQ(back.candle_body_width, 10);
  RenderSpec bad;
  bad.wick_width = 20;
  EXPECT_THROW(bad.validate(), InputError);
}

TEST(Normalize, WhiteAndBlackPixels) {
  ChartImage white(1, 1, {255, 255, 255}), black(1, 1, {0, 0, 0});
  const auto w = normalize_image<double>(white);
  const auto b = normalize_image<double>(black);
  const double expect_w[3] = {2.2489, 2.4286, 2.6400};
  const double expect_b[3] = {-2.1179, -2.0357, -1.8044};
  for (int c = 0; c < 3; ++c) {
    EXPECT_NEAR(w[c](0, 0), expect_w[c], 1e-4);
    EXPECT_NEAR(b[c](0, 0), expect_b[c], 1e-4);
  }
}

TEST(Normalize, MeanPixelIsNearZero) {
  const double mu[3] = {0.485, 0.456, 0.406}, sd[3] = {0.229, 0.224, 0.225};
  Rgb px{static_cast<std::uint8_t>(std::lround(255 * mu[0])), static_cast<std::uint8_t>(std::lround(255 * mu[1])),
         static_cast<std::uint8_t>(std::lround(255 * mu[2]))};
  const auto t = normalize_image<float>(ChartImage(2, 2, px));
  for (int c = 0; c < 3; ++c) EXPECT_LE(std::abs(t[c](1, 1)), 1.0 / (255 * sd[c]));
}

TEST(Normalize, RoundTrip) {
  RngStream rng(2, 2);
  const auto img = render_candles(fixtures::random_first_hour(rng));
  EXPECT_TRUE(denormalize_image(normalize_image<float>(img)) == img);
  EXPECT_TRUE(denormalize_image(normalize_image<double>(img)) == img);
}

TEST(Png, RoundTripAndDimensions) {
  RngStream rng(4, 4);
  const auto img = render_candles(fixtures::random_first_hour(rng));
  const auto bytes = encode_png(img);
  ASSERT_GT(bytes.size(), 8u);
  EXPECT_EQ(bytes[1], 'P');
  const auto back = decode_png(bytes);
  EXPECT_EQ(back.width(), 224);
  EXPECT_EQ(back.height(), 224);
  EXPECT_TRUE(back == img);

  const auto other = render_candles(fixtures::random_first_hour(rng));
  EXPECT_NE(encode_png(other), bytes);

  const auto dir = fixtures::scratch_dir("png");
  encode_png(img, dir / "a.png");
  EXPECT_TRUE(decode_png(dir / "a.png") == img);
}

TEST(Png, RejectsGarbage) {
  std::vector<std::uint8_t> junk(100, 7);
  EXPECT_THROW(decode_png(junk), InputError);
}
