// Copyright 2026 The ukiyo Authors
// SPDX-License-Identifier: Apache-2.0

#include "ukiyo/image.hpp"

#include <algorithm>
#include <cmath>

#include "ukiyo/error.hpp"

namespace ukiyo {

RgbImage::RgbImage(int width, int height, Rgb fill) : width_(width), height_(height) {
  if (width < 0 || height < 0) throw Error(ErrorKind::InvalidArgument, "negative image dimensions");
  data_.resize(3 * pixel_count());
  for (std::size_t i = 0; i < pixel_count(); ++i) set_pixel(i, fill);
}

std::uint8_t to_byte(double value) noexcept {
  if (!(value > 0.0)) return 0;
  if (value >= 1.0) return 255;
  return static_cast<std::uint8_t>(std::floor(value * 255.0 + 0.5));
}

Bitmap to_bitmap(const RgbImage& image) {
  Bitmap bmp{image.width(), image.height(), 3, {}};
  bmp.bytes.resize(image.data().size());
  std::transform(image.data().begin(), image.data().end(), bmp.bytes.begin(), to_byte);
  return bmp;
}

RgbImage from_bitmap(const Bitmap& bitmap) {
  if (bitmap.channels != 3 && bitmap.channels != 4) {
    throw Error(ErrorKind::InvalidArgument, "expected an RGB or RGBA bitmap");
  }
  RgbImage image(bitmap.width, bitmap.height);
  const auto n = image.pixel_count();
  for (std::size_t i = 0; i < n; ++i) {
    const auto* p = &bitmap.bytes[i * bitmap.channels];
    image.set_pixel(i, {p[0] / 255.0, p[1] / 255.0, p[2] / 255.0});
  }
  return image;
}

}  // namespace ukiyo
