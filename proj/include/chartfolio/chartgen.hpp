#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "chartfolio/kvconfig.hpp"
#include "chartfolio/marketdata.hpp"

namespace chartfolio {

inline constexpr int kImageSize = 224;
inline constexpr int kChannels = 3;

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Row-major RGB8 image.
class ChartImage {
 public:
  ChartImage(int width = kImageSize, int height = kImageSize, Rgb fill = {255, 255, 255});

  int width() const { return width_; }
  int height() const { return height_; }
  Rgb at(int x, int y) const;
  void set(int x, int y, Rgb c);
  /// Fills the inclusive rectangle [x0, x1] x [y0, y1], clipped to the image.
  void fill_rect(int x0, int y0, int x1, int y1, Rgb c);
  std::size_t count(Rgb c) const;

  std::span<const std::uint8_t> bytes() const { return pixels_; }
  std::span<std::uint8_t> bytes() { return pixels_; }

  friend bool operator==(const ChartImage&, const ChartImage&) = default;

 private:
  int width_;
  int height_;
  std::vector<std::uint8_t> pixels_;
};

struct RenderSpec {
  double price_pane_fraction = 0.72;
  double gap_fraction = 0.03;
  double volume_pane_fraction = 0.25;
  int margin = 6;
  int candle_body_width = 14;
  int wick_width = 2;
  Rgb background{255, 255, 255};
  Rgb up_color{0, 128, 0};
  Rgb down_color{200, 30, 30};
  Rgb volume_color{120, 120, 120};

  /// Throws InputError when the panes or the 12-candle layout do not fit.
  void validate(int width = kImageSize, int height = kImageSize) const;

  static RenderSpec from_config(const KvConfig& cfg);
  KvConfig to_config() const;
};

/// Pixel geometry derived from a RenderSpec.
struct ChartLayout {
  int price_top = 0, price_height = 0;
  int volume_top = 0, volume_height = 0;
  int slot_width = 0;
  int first_slot_left = 0;

  int body_left(int candle) const;
  int wick_left(int candle) const;

  static ChartLayout compute(const RenderSpec& spec, int width = kImageSize,
                             int height = kImageSize);

 private:
  int body_width_ = 0;
  int wick_width_ = 0;
};

/// floor((1 - t) * (rows - 1)) with t = (v - lo) / (hi - lo). Products within
/// 1e-9 of an integer are snapped first so that equal ratios computed from
/// rescaled inputs land on the same row.
int value_to_row(double v, double lo, double hi, int rows);

/// Candles in the upper pane scaled to [min low, max high]; volume bars in the
/// lower pane scaled to [0, max volume]. Flat windows draw every body as a
/// one-pixel line on the pane midline; zero volume draws nothing.
ChartImage render_candles(std::span<const OhlcvBar> bars, const RenderSpec& spec = {});

struct ImageNormSpec {
  Eigen::Array3d mean{0.485, 0.456, 0.406};
  Eigen::Array3d stdev{0.229, 0.224, 0.225};
};

template <typename Scalar>
using ChannelPlane = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Channel-major C x H x W tensor.
template <typename Scalar>
using ImageTensor = std::array<ChannelPlane<Scalar>, kChannels>;

/// x' = (x / 255 - mean_c) / stdev_c per channel.
template <typename Scalar = float>
ImageTensor<Scalar> normalize_image(const ChartImage& img, const ImageNormSpec& norm = {}) {
  ImageTensor<Scalar> out;
  const auto bytes = img.bytes();
  for (int c = 0; c < kChannels; ++c) {
    out[c].resize(img.height(), img.width());
    const Scalar mu = static_cast<Scalar>(norm.mean[c]);
    const Scalar sd = static_cast<Scalar>(norm.stdev[c]);
    for (int y = 0; y < img.height(); ++y) {
      for (int x = 0; x < img.width(); ++x) {
        const auto byte = bytes[(static_cast<std::size_t>(y) * img.width() + x) * kChannels + c];
        out[c](y, x) = (static_cast<Scalar>(byte) / Scalar(255) - mu) / sd;
      }
    }
  }
  return out;
}

/// Inverse of normalize_image, rounding to the nearest byte.
template <typename Scalar>
ChartImage denormalize_image(const ImageTensor<Scalar>& t, const ImageNormSpec& norm = {}) {
  const int h = static_cast<int>(t[0].rows());
  const int w = static_cast<int>(t[0].cols());
  ChartImage img(w, h);
  auto bytes = img.bytes();
  for (int c = 0; c < kChannels; ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double v = (static_cast<double>(t[c](y, x)) * norm.stdev[c] + norm.mean[c]) * 255.0;
        v = std::clamp(std::round(v), 0.0, 255.0);
        bytes[(static_cast<std::size_t>(y) * w + x) * kChannels + c] = static_cast<std::uint8_t>(v);
      }
    }
  }
  return img;
}

/// Lossless 8-bit RGB PNG, no ancillary chunks.
std::vector<std::uint8_t> encode_png(const ChartImage& img);
void encode_png(const ChartImage& img, const std::filesystem::path& path);
ChartImage decode_png(std::span<const std::uint8_t> data);
ChartImage decode_png(const std::filesystem::path& path);

}  // namespace chartfolio
