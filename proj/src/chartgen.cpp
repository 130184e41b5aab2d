#include "chartfolio/chartgen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "chartfolio/csv.hpp"

namespace chartfolio {

ChartImage::ChartImage(int width, int height, Rgb fill)
    : width_(width), height_(height),
      pixels_(static_cast<std::size_t>(width) * height * kChannels) {
  for (std::size_t i = 0; i < pixels_.size(); i += kChannels) {
    pixels_[i] = fill.r;
    pixels_[i + 1] = fill.g;
    pixels_[i + 2] = fill.b;
  }
}

Rgb ChartImage::at(int x, int y) const {
  const std::size_t i = (static_cast<std::size_t>(y) * width_ + x) * kChannels;
  return {pixels_[i], pixels_[i + 1], pixels_[i + 2]};
}

void ChartImage::set(int x, int y, Rgb c) {
  const std::size_t i = (static_cast<std::size_t>(y) * width_ + x) * kChannels;
  pixels_[i] = c.r;
  pixels_[i + 1] = c.g;
  pixels_[i + 2] = c.b;
}

void ChartImage::fill_rect(int x0, int y0, int x1, int y1, Rgb c) {
  x0 = std::max(x0, 0);
  y0 = std::max(y0, 0);
  x1 = std::min(x1, width_ - 1);
  y1 = std::min(y1, height_ - 1);
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) set(x, y, c);
}

std::size_t ChartImage::count(Rgb c) const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < pixels_.size(); i += kChannels) {
    n += pixels_[i] == c.r && pixels_[i + 1] == c.g && pixels_[i + 2] == c.b;
  }
  return n;
}

ChartLayout ChartLayout::compute(const RenderSpec& spec, int width, int height) {
  ChartLayout l;
  l.price_top = 0;
  l.price_height = static_cast<int>(std::lround(height * spec.price_pane_fraction));
  l.volume_height = static_cast<int>(std::lround(height * spec.volume_pane_fraction));
  l.volume_top = height - l.volume_height;
  l.slot_width = (width - 2 * spec.margin) / kFirstHourBars;
  l.first_slot_left = spec.margin + ((width - 2 * spec.margin) - kFirstHourBars * l.slot_width) / 2;
  l.body_width_ = spec.candle_body_width;
  l.wick_width_ = spec.wick_width;
  return l;
}

int ChartLayout::body_left(int candle) const {
  return first_slot_left + candle * slot_width + (slot_width - body_width_) / 2;
}

int ChartLayout::wick_left(int candle) const {
  return body_left(candle) + (body_width_ - wick_width_) / 2;
}

void RenderSpec::validate(int width, int height) const {
  if (!(price_pane_fraction > 0 && price_pane_fraction < 1)) {
    throw InputError("price_pane_fraction must be in (0, 1)");
  }
  if (!(volume_pane_fraction >= 0 && gap_fraction >= 0) ||
      price_pane_fraction + gap_fraction + volume_pane_fraction > 1.0 + 1e-12) {
    throw InputError("pane fractions must be non-negative and sum to at most 1");
  }
  if (margin < 0 || candle_body_width < 1 || wick_width < 1 || wick_width > candle_body_width) {
    throw InputError("candle geometry must satisfy 1 <= wick_width <= candle_body_width, margin >= 0");
  }
  if (kFirstHourBars * candle_body_width > width - 2 * margin) {
    throw InputError("12 candles do not fit within the image width minus margins");
  }
  const auto l = ChartLayout::compute(*this, width, height);
  if (l.price_height < 2 || l.price_height > l.volume_top) {
    throw InputError("price pane too small or overlapping the volume pane");
  }
}

namespace {

Rgb parse_rgb(const KvConfig& cfg, const std::string& key, Rgb fallback) {
  if (!cfg.contains(key)) return fallback;
  const auto v = cfg.get_doubles(key);
  if (v.size() != 3) throw InputError("config key " + key + ": expected r,g,b");
  for (double c : v) {
    if (c < 0 || c > 255 || c != std::floor(c)) throw InputError("config key " + key + ": bad byte");
  }
  return {static_cast<std::uint8_t>(v[0]), static_cast<std::uint8_t>(v[1]),
          static_cast<std::uint8_t>(v[2])};
}

std::string rgb_text(Rgb c) {
  return std::to_string(c.r) + "," + std::to_string(c.g) + "," + std::to_string(c.b);
}

}  // namespace

RenderSpec RenderSpec::from_config(const KvConfig& cfg) {
  RenderSpec s;
  s.price_pane_fraction = cfg.get_double("price_pane_fraction", s.price_pane_fraction);
  s.gap_fraction = cfg.get_double("gap_fraction", s.gap_fraction);
  s.volume_pane_fraction = cfg.get_double("volume_pane_fraction", s.volume_pane_fraction);
  s.margin = static_cast<int>(cfg.get_int("margin", s.margin));
  s.candle_body_width = static_cast<int>(cfg.get_int("candle_body_width", s.candle_body_width));
  s.wick_width = static_cast<int>(cfg.get_int("wick_width", s.wick_width));
  s.background = parse_rgb(cfg, "background", s.background);
  s.up_color = parse_rgb(cfg, "up_color", s.up_color);
  s.down_color = parse_rgb(cfg, "down_color", s.down_color);
  s.volume_color = parse_rgb(cfg, "volume_color", s.volume_color);
  s.validate();
  return s;
}

KvConfig RenderSpec::to_config() const {
  KvConfig cfg;
  cfg.set("price_pane_fraction", format_double(price_pane_fraction));
  cfg.set("gap_fraction", format_double(gap_fraction));
  cfg.set("volume_pane_fraction", format_double(volume_pane_fraction));
  cfg.set("margin", std::to_string(margin));
  cfg.set("candle_body_width", std::to_string(candle_body_width));
  cfg.set("wick_width", std::to_string(wick_width));
  cfg.set("background", rgb_text(background));
  cfg.set("up_color", rgb_text(up_color));
  cfg.set("down_color", rgb_text(down_color));
  cfg.set("volume_color", rgb_text(volume_color));
  return cfg;
}

int value_to_row(double v, double lo, double hi, int rows) {
  const double t = (v - lo) / (hi - lo);
  double r = (1.0 - t) * (rows - 1);
  const double nearest = std::round(r);
  if (std::abs(r - nearest) < 1e-9) r = nearest;
  return std::clamp(static_cast<int>(std::floor(r)), 0, rows - 1);
}

ChartImage render_candles(std::span<const OhlcvBar> bars, const RenderSpec& spec) {
  if (bars.size() != static_cast<std::size_t>(kFirstHourBars)) {
    throw InputError("render_candles needs exactly " + std::to_string(kFirstHourBars) +
                     " bars, got " + std::to_string(bars.size()));
  }
  spec.validate();
  const auto layout = ChartLayout::compute(spec);
  ChartImage img(kImageSize, kImageSize, spec.background);

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  double max_volume = 0;
  for (const auto& b : bars) {
    lo = std::min(lo, b.low);
    hi = std::max(hi, b.high);
    max_volume = std::max(max_volume, static_cast<double>(b.volume));
  }
  const bool flat = !(hi > lo);
  const int midline = layout.price_top + (layout.price_height - 1) / 2;
  auto price_row = [&](double v) {
    return flat ? midline : layout.price_top + value_to_row(v, lo, hi, layout.price_height);
  };

  const int body_w = spec.candle_body_width;
  const int wick_w = spec.wick_width;
  for (int k = 0; k < kFirstHourBars; ++k) {
    const auto& b = bars[k];
    if (max_volume > 0 && b.volume > 0) {
      const int top = layout.volume_top +
                      value_to_row(static_cast<double>(b.volume), 0.0, max_volume, layout.volume_height);
      img.fill_rect(layout.body_left(k), top, layout.body_left(k) + body_w - 1,
                    layout.volume_top + layout.volume_height - 1, spec.volume_color);
    }
    const Rgb color = b.close >= b.open ? spec.up_color : spec.down_color;
    img.fill_rect(layout.wick_left(k), price_row(b.high), layout.wick_left(k) + wick_w - 1,
                  price_row(b.low), color);
    img.fill_rect(layout.body_left(k), price_row(std::max(b.open, b.close)),
                  layout.body_left(k) + body_w - 1, price_row(std::min(b.open, b.close)), color);
  }
  return img;
}

}  // namespace chartfolio
