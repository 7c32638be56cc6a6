// Copyright 2026 The ukiyo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "ukiyo/image.hpp"

namespace ukiyo {

/// Rec. 709 luma weights applied to stored (non-linearized) values.
double luminance(const Rgb& c) noexcept;

/// K >= 1 pairwise distinct colors in [0,1]^3 (min distance > 1e-6).
class Palette {
 public:
  Palette() = default;
  /// Throws InvalidPalette on an empty list, out-of-range channels or
  /// near-duplicate colors.
  explicit Palette(std::vector<Rgb> colors);

  std::size_t size() const noexcept { return colors_.size(); }
  const Rgb& operator[](std::size_t k) const noexcept { return colors_[k]; }
  const std::vector<Rgb>& colors() const noexcept { return colors_; }

  /// Stable order of layer indices by ascending luminance.
  std::vector<std::size_t> luminance_order() const;

  friend bool operator==(const Palette&, const Palette&) = default;

 private:
  std::vector<Rgb> colors_;
};

inline constexpr int kDefaultLayers = 6;
inline constexpr double kDefaultLambda = 0.05;

struct KMeansOptions {
  int max_iterations = 100;
  double tolerance = 1e-4;  // stop when every centroid moves less than this
};

struct PaletteFit {
  Palette palette;              // sorted by ascending luminance
  std::vector<double> inertia;  // after each assignment step
  int iterations = 0;
  bool converged = false;
};

/// Lloyd's algorithm over pixel colors with k-means++ seeding from `seed`.
/// Identical colors are merged and weighted, which leaves the objective and
/// every assignment unchanged. An empty cluster is reseeded at the point
/// farthest from its centroid. Throws TooFewDistinctColors when the image has
/// fewer than K distinct colors, EmptyImage / InvalidArgument on bad input.
PaletteFit fit_palette(const RgbImage& image, int k, std::uint64_t seed, const KMeansOptions& options = {});
Palette estimate_palette(const RgbImage& image, int k, std::uint64_t seed);

// Up to this many layers unmix_pixel also checks every face of the simplex
// exactly, which makes the result globally optimal.
inline constexpr std::size_t kExactUnmixLayers = 8;

struct UnmixOptions {
  double step = 0.1;
  int iterations = 200;
};

/// E(a) = |sum_k a_k c_k - p|^2 + lambda * sum_k a_k (1 - a_k).
double unmix_energy(std::span<const double> alpha, const Rgb& pixel, const Palette& palette, double lambda);

/// Euclidean projection onto the probability simplex, in place.
void project_to_simplex(std::span<double> values);

/// Minimizes unmix_energy over the simplex by projected gradient descent from
/// the uniform point, then (K <= kExactUnmixLayers) keeps the best KKT point
/// over all simplex faces. A pixel equal to a palette color gets the exact
/// one-hot vector, which is a global minimizer (E = 0).
std::vector<double> unmix_pixel(const Rgb& pixel, const Palette& palette, double lambda,
                                const UnmixOptions& options = {});

/// K straight-alpha layers over a base palette. Storage is pixel-major:
/// alpha(p, k) = alphas[p*K + k], layer color (p, k) = colors[(p*K + k)*3 ..].
struct LayerStack {
  int width = 0;
  int height = 0;
  Palette palette;
  std::vector<double> alphas;
  std::vector<double> colors;
  std::vector<double> clip_error;  // per pixel, |sum a_k u_k - p|_inf

  std::size_t layers() const noexcept { return palette.size(); }
  std::size_t pixel_count() const noexcept { return static_cast<std::size_t>(width) * height; }
  double alpha(std::size_t pixel, std::size_t k) const noexcept { return alphas[pixel * layers() + k]; }
  Rgb color(std::size_t pixel, std::size_t k) const noexcept {
    const double* c = &colors[(pixel * layers() + k) * 3];
    return {c[0], c[1], c[2]};
  }
  double max_clip_error() const noexcept;

  friend bool operator==(const LayerStack&, const LayerStack&) = default;
};

/// Per pixel: a = unmix_pixel, r = p - sum a_k c_k, u_k = clamp(c_k + r).
/// Unmixing is memoized per distinct color.
LayerStack decompose(const RgbImage& image, const Palette& palette, double lambda);

/// "Alpha add": out = clamp(sum_k a_k u_k, 0, 1).
RgbImage compose(const LayerStack& stack);

/// u'_k = clamp(c'_k + (u_k - c_k)); alphas unchanged, base palette replaced.
/// Layers whose color is unchanged are copied bit for bit.
/// Throws PaletteSizeMismatch.
LayerStack recolor(const LayerStack& stack, const Palette& new_palette);

/// Estimates a K-color palette from `reference`, pairs it with the base
/// palette by luminance rank and recolors.
LayerStack transfer_palette(const LayerStack& stack, const RgbImage& reference, std::uint64_t seed);

/// Straight RGBA: RGB = layer color, A = round-half-up(alpha * 255).
Bitmap layer_bitmap(const LayerStack& stack, std::size_t k);
/// Grayscale clipping error * 255.
Bitmap error_map_bitmap(const LayerStack& stack);

/// Rebuilds a stack from 8-bit layer rasters. Alphas are renormalized to sum
/// to 1 per pixel (uniform where every alpha is 0); clip errors are zero.
LayerStack stack_from_layers(const std::vector<Bitmap>& layers, const Palette& palette);

struct PaletteDocument {
  Palette palette;
  double lambda = kDefaultLambda;
  std::uint64_t seed = 0;
};

/// {"colors": [[r,g,b],...], "lambda": f, "seed": n}; lambda and seed are
/// optional on read.
void write_palette_json(std::ostream& out, const PaletteDocument& doc);
PaletteDocument read_palette_json(std::istream& in);

}  // namespace ukiyo
