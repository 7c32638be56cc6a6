// Copyright 2026 The ukiyo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ukiyo/image.hpp"

namespace ukiyo {

/// Decodes PNG or JPEG (sniffed from the signature) into 8-bit RGB, or RGBA
/// when `keep_alpha` is set and the source has an alpha channel.
/// Throws Error(InvalidArgument) on undecodable data.
Bitmap decode_image(std::span<const std::uint8_t> data, bool keep_alpha = false);

struct ImageSize {
  int width = 0;
  int height = 0;
};

/// Reads only the header of a PNG or JPEG; throws like decode_image.
ImageSize probe_image(std::span<const std::uint8_t> data);

/// PNG encoding is deterministic: identical bitmaps give identical bytes.
std::vector<std::uint8_t> encode_png(const Bitmap& bitmap);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text_file(const std::filesystem::path& path, const std::string& text);

RgbImage load_rgb(const std::filesystem::path& path);
void save_png(const std::filesystem::path& path, const RgbImage& image);

}  // namespace ukiyo
