// Copyright 2026 The ukiyo Authors
// SPDX-License-Identifier: Apache-2.0

#include "ukiyo/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>

// jpeglib.h needs size_t and FILE declared first.
#include <jpeglib.h>

#include "ukiyo/error.hpp"

namespace ukiyo {

namespace {

constexpr std::uint8_t kPngSignature[] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};

Bitmap decode_png(std::span<const std::uint8_t> data, bool keep_alpha) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, data.data(), data.size())) {
    throw Error(ErrorKind::InvalidArgument, std::string("cannot decode PNG: ") + image.message);
  }
  // Alpha is always read as stored; letting libpng drop it would composite
  // onto black.
  const bool alpha = (image.format & PNG_FORMAT_FLAG_ALPHA) != 0;
  image.format = alpha ? PNG_FORMAT_RGBA : PNG_FORMAT_RGB;
  Bitmap bmp{static_cast<int>(image.width), static_cast<int>(image.height), alpha ? 4 : 3, {}};
  bmp.bytes.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, bmp.bytes.data(), 0, nullptr)) {
    png_image_free(&image);
    throw Error(ErrorKind::InvalidArgument, std::string("cannot decode PNG: ") + image.message);
  }
  if (alpha && !keep_alpha) {
    const std::size_t n = static_cast<std::size_t>(bmp.width) * bmp.height;
    for (std::size_t i = 0; i < n; ++i) {
      for (int ch = 0; ch < 3; ++ch) bmp.bytes[i * 3 + ch] = bmp.bytes[i * 4 + ch];
    }
    bmp.bytes.resize(n * 3);
    bmp.channels = 3;
  }
  return bmp;
}

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr info) {
  auto* err = reinterpret_cast<JpegErrorManager*>(info->err);
  (*info->err->format_message)(info, err->message);
  std::longjmp(err->jump, 1);
}

Bitmap decode_jpeg(std::span<const std::uint8_t> data) {
  jpeg_decompress_struct info;
  JpegErrorManager err;
  info.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  Bitmap bmp;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&info);
    throw Error(ErrorKind::InvalidArgument, std::string("cannot decode JPEG: ") + err.message);
  }
  jpeg_create_decompress(&info);
  jpeg_mem_src(&info, data.data(), static_cast<unsigned long>(data.size()));
  jpeg_read_header(&info, TRUE);
  info.out_color_space = JCS_RGB;
  jpeg_start_decompress(&info);
  bmp.width = static_cast<int>(info.output_width);
  bmp.height = static_cast<int>(info.output_height);
  bmp.channels = 3;
  bmp.bytes.resize(static_cast<std::size_t>(bmp.width) * bmp.height * 3);
  while (info.output_scanline < info.output_height) {
    JSAMPROW row = bmp.bytes.data() + static_cast<std::size_t>(info.output_scanline) * bmp.width * 3;
    jpeg_read_scanlines(&info, &row, 1);
  }
  jpeg_finish_decompress(&info);
  jpeg_destroy_decompress(&info);
  return bmp;
}

}  // namespace

Bitmap decode_image(std::span<const std::uint8_t> data, bool keep_alpha) {
  if (data.size() >= sizeof(kPngSignature) && std::equal(std::begin(kPngSignature), std::end(kPngSignature), data.begin())) {
    return decode_png(data, keep_alpha);
  }
  if (data.size() >= 3 && data[0] == 0xFF && data[1] == 0xD8 && data[2] == 0xFF) {
    return decode_jpeg(data);
  }
  throw Error(ErrorKind::InvalidArgument, "unrecognized image format (expected PNG or JPEG)");
}

ImageSize probe_image(std::span<const std::uint8_t> data) {
  if (data.size() >= sizeof(kPngSignature) && std::equal(std::begin(kPngSignature), std::end(kPngSignature), data.begin())) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, data.data(), data.size())) {
      throw Error(ErrorKind::InvalidArgument, std::string("cannot decode PNG: ") + image.message);
    }
    ImageSize size{static_cast<int>(image.width), static_cast<int>(image.height)};
    png_image_free(&image);
    return size;
  }
  if (data.size() >= 3 && data[0] == 0xFF && data[1] == 0xD8 && data[2] == 0xFF) {
    jpeg_decompress_struct info;
    JpegErrorManager err;
    info.err = jpeg_std_error(&err.base);
    err.base.error_exit = jpeg_error_exit;
    if (setjmp(err.jump)) {
      jpeg_destroy_decompress(&info);
      throw Error(ErrorKind::InvalidArgument, std::string("cannot decode JPEG: ") + err.message);
    }
    jpeg_create_decompress(&info);
    jpeg_mem_src(&info, data.data(), static_cast<unsigned long>(data.size()));
    jpeg_read_header(&info, TRUE);
    ImageSize size{static_cast<int>(info.image_width), static_cast<int>(info.image_height)};
    jpeg_destroy_decompress(&info);
    return size;
  }
  throw Error(ErrorKind::InvalidArgument, "unrecognized image format (expected PNG or JPEG)");
}

std::vector<std::uint8_t> encode_png(const Bitmap& bitmap) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(bitmap.width);
  image.height = static_cast<png_uint_32>(bitmap.height);
  switch (bitmap.channels) {
    case 1: image.format = PNG_FORMAT_GRAY; break;
    case 3: image.format = PNG_FORMAT_RGB; break;
    case 4: image.format = PNG_FORMAT_RGBA; break;
    default: throw Error(ErrorKind::InvalidArgument, "PNG encoding supports 1, 3 or 4 channels");
  }
  if (bitmap.width <= 0 || bitmap.height <= 0) throw Error(ErrorKind::EmptyImage, "cannot encode an empty image");

  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, bitmap.bytes.data(), 0, nullptr)) {
    throw Error(ErrorKind::InvalidArgument, std::string("PNG encoding failed: ") + image.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, bitmap.bytes.data(), 0, nullptr)) {
    throw Error(ErrorKind::InvalidArgument, std::string("PNG encoding failed: ") + image.message);
  }
  out.resize(size);
  return out;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  if (in.bad()) throw Error(ErrorKind::Io, "read failed: " + path.string());
  return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::Io, "write failed: " + path.string());
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  write_file(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

RgbImage load_rgb(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return from_bitmap(decode_image(bytes));
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

void save_png(const std::filesystem::path& path, const RgbImage& image) { write_file(path, encode_png(to_bitmap(image))); }

}  // namespace ukiyo
