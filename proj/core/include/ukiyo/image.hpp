// Copyright 2026 The ukiyo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace ukiyo {

using Rgb = std::array<double, 3>;

/// Interleaved RGB raster with channel values in [0,1], row-major from the
/// top-left pixel. 8-bit sources map v -> v / 255 without gamma conversion.
class RgbImage {
 public:
  RgbImage() = default;
  RgbImage(int width, int height, Rgb fill = {0.0, 0.0, 0.0});

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t pixel_count() const noexcept { return static_cast<std::size_t>(width_) * height_; }
  bool empty() const noexcept { return pixel_count() == 0; }

  Rgb pixel(std::size_t index) const noexcept {
    const double* p = &data_[3 * index];
    return {p[0], p[1], p[2]};
  }
  Rgb pixel(int x, int y) const noexcept { return pixel(static_cast<std::size_t>(y) * width_ + x); }
  void set_pixel(std::size_t index, const Rgb& c) noexcept {
    double* p = &data_[3 * index];
    p[0] = c[0];
    p[1] = c[1];
    p[2] = c[2];
  }
  void set_pixel(int x, int y, const Rgb& c) noexcept { set_pixel(static_cast<std::size_t>(y) * width_ + x, c); }

  const std::vector<double>& data() const noexcept { return data_; }
  std::vector<double>& data() noexcept { return data_; }

  friend bool operator==(const RgbImage&, const RgbImage&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

/// Rounds a [0,1] value to 8 bits, half-up, after clamping.
std::uint8_t to_byte(double value) noexcept;

/// 8-bit raster with 1 (gray), 3 (RGB) or 4 (RGBA) interleaved channels.
struct Bitmap {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<std::uint8_t> bytes;

  friend bool operator==(const Bitmap&, const Bitmap&) = default;
};

Bitmap to_bitmap(const RgbImage& image);
RgbImage from_bitmap(const Bitmap& bitmap);  // RGB or RGBA (alpha ignored)

}  // namespace ukiyo
