// Copyright 2026 The ukiyo Authors
// SPDX-License-Identifier: Apache-2.0

#include "ukiyo/color_separation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <unordered_map>

#include <Eigen/Dense>

#include "json.hpp"
#include "ukiyo/error.hpp"

namespace ukiyo {
namespace {

constexpr double kMinColorDistance = 1e-6;

double squared_distance(const Rgb& a, const Rgb& b) noexcept {
  const double dr = a[0] - b[0], dg = a[1] - b[1], db = a[2] - b[2];
  return dr * dr + dg * dg + db * db;
}

double clamp01(double v) noexcept { return std::clamp(v, 0.0, 1.0); }

bool bit_equal(const Rgb& a, const Rgb& b) noexcept {
  return std::bit_cast<std::uint64_t>(a[0]) == std::bit_cast<std::uint64_t>(b[0]) &&
         std::bit_cast<std::uint64_t>(a[1]) == std::bit_cast<std::uint64_t>(b[1]) &&
         std::bit_cast<std::uint64_t>(a[2]) == std::bit_cast<std::uint64_t>(b[2]);
}

struct ColorKey {
  std::uint64_t r, g, b;
  friend bool operator==(const ColorKey&, const ColorKey&) = default;
};

struct ColorKeyHash {
  std::size_t operator()(const ColorKey& k) const noexcept {
    std::uint64_t h = k.r * 0x9E3779B97F4A7C15ull;
    h ^= k.g + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
    h ^= k.b + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

ColorKey key_of(const Rgb& c) noexcept {
  // +0.0 folds -0.0 so equal colors share a key.
  return {std::bit_cast<std::uint64_t>(c[0] + 0.0), std::bit_cast<std::uint64_t>(c[1] + 0.0),
          std::bit_cast<std::uint64_t>(c[2] + 0.0)};
}

struct WeightedColors {
  std::vector<Rgb> colors;
  std::vector<double> weights;
};

WeightedColors distinct_colors(const RgbImage& image) {
  std::vector<Rgb> all(image.pixel_count());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = image.pixel(i);
  std::sort(all.begin(), all.end());
  WeightedColors out;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    while (j < all.size() && all[j] == all[i]) ++j;
    out.colors.push_back(all[i]);
    out.weights.push_back(static_cast<double>(j - i));
    i = j;
  }
  return out;
}

// Draws an index with probability proportional to `mass`.
std::size_t sample_index(std::span<const double> mass, std::mt19937_64& rng) {
  const double total = std::accumulate(mass.begin(), mass.end(), 0.0);
  std::uniform_real_distribution<double> uniform(0.0, total);
  const double target = uniform(rng);
  double running = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < mass.size(); ++i) {
    if (mass[i] <= 0.0) continue;
    running += mass[i];
    last_positive = i;
    if (running > target) return i;
  }
  return last_positive;
}

}  // namespace

double luminance(const Rgb& c) noexcept { return 0.2126 * c[0] + 0.7152 * c[1] + 0.0722 * c[2]; }

Palette::Palette(std::vector<Rgb> colors) : colors_(std::move(colors)) {
  if (colors_.empty()) throw Error(ErrorKind::InvalidPalette, "palette needs at least one color");
  for (std::size_t i = 0; i < colors_.size(); ++i) {
    for (double v : colors_[i]) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw Error(ErrorKind::InvalidPalette, "palette color " + std::to_string(i) + " has a channel outside [0,1]");
      }
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (std::sqrt(squared_distance(colors_[i], colors_[j])) <= kMinColorDistance) {
        throw Error(ErrorKind::InvalidPalette,
                    "palette colors " + std::to_string(j) + " and " + std::to_string(i) + " coincide");
      }
    }
  }
}

std::vector<std::size_t> Palette::luminance_order() const {
  std::vector<std::size_t> order(colors_.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [this](std::size_t a, std::size_t b) { return luminance(colors_[a]) < luminance(colors_[b]); });
  return order;
}

PaletteFit fit_palette(const RgbImage& image, int k, std::uint64_t seed, const KMeansOptions& options) {
  if (image.empty()) throw Error(ErrorKind::EmptyImage, "cannot estimate a palette from an empty image");
  if (k < 1) throw Error(ErrorKind::InvalidArgument, "palette size must be >= 1, got " + std::to_string(k));

  const auto points = distinct_colors(image);
  const std::size_t n = points.colors.size();
  const auto kk = static_cast<std::size_t>(k);
  if (n < kk) {
    throw Error(ErrorKind::TooFewDistinctColors,
                "image has " + std::to_string(n) + " distinct colors, fewer than K=" + std::to_string(k));
  }

  // k-means++ seeding; the weights make this equivalent to sampling pixels.
  std::mt19937_64 rng(seed);
  std::vector<Rgb> centers;
  centers.reserve(kk);
  centers.push_back(points.colors[sample_index(points.weights, rng)]);
  std::vector<double> nearest(n);
  for (std::size_t i = 0; i < n; ++i) nearest[i] = squared_distance(points.colors[i], centers[0]);
  std::vector<double> mass(n);
  while (centers.size() < kk) {
    for (std::size_t i = 0; i < n; ++i) mass[i] = points.weights[i] * nearest[i];
    const auto pick = sample_index(mass, rng);
    centers.push_back(points.colors[pick]);
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], squared_distance(points.colors[i], centers.back()));
    }
  }

  PaletteFit fit;
  std::vector<std::size_t> label(n);
  std::vector<double> cost(n);
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double best_d = squared_distance(points.colors[i], centers[0]);
      for (std::size_t c = 1; c < kk; ++c) {
        const double d = squared_distance(points.colors[i], centers[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      label[i] = best;
      cost[i] = best_d;
      inertia += points.weights[i] * best_d;
    }
    fit.inertia.push_back(inertia);
    fit.iterations = iter + 1;

    // Weighted means taken relative to the first member, so a cluster of
    // identical colors reproduces that color exactly.
    std::vector<Rgb> anchor(kk);
    std::vector<bool> has_anchor(kk, false);
    std::vector<Rgb> offset(kk, Rgb{0, 0, 0});
    std::vector<double> weight(kk, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = label[i];
      if (!has_anchor[c]) {
        anchor[c] = points.colors[i];
        has_anchor[c] = true;
      }
      for (int ch = 0; ch < 3; ++ch) offset[c][ch] += points.weights[i] * (points.colors[i][ch] - anchor[c][ch]);
      weight[c] += points.weights[i];
    }

    double shift = 0.0;
    for (std::size_t c = 0; c < kk; ++c) {
      Rgb next;
      if (weight[c] > 0.0) {
        for (int ch = 0; ch < 3; ++ch) next[ch] = anchor[c][ch] + offset[c][ch] / weight[c];
      } else {
        const auto far = static_cast<std::size_t>(std::max_element(cost.begin(), cost.end()) - cost.begin());
        next = points.colors[far];
        cost[far] = 0.0;
      }
      shift = std::max(shift, std::sqrt(squared_distance(next, centers[c])));
      centers[c] = next;
    }
    if (shift < options.tolerance) {
      fit.converged = true;
      break;
    }
  }

  std::stable_sort(centers.begin(), centers.end(), [](const Rgb& a, const Rgb& b) {
    const double la = luminance(a), lb = luminance(b);
    if (la != lb) return la < lb;
    return a < b;
  });
  for (auto& c : centers) {
    for (auto& v : c) v = clamp01(v);
  }
  fit.palette = Palette(std::move(centers));
  return fit;
}

Palette estimate_palette(const RgbImage& image, int k, std::uint64_t seed) { return fit_palette(image, k, seed).palette; }

double unmix_energy(std::span<const double> alpha, const Rgb& pixel, const Palette& palette, double lambda) {
  Rgb mix{0, 0, 0};
  double sparsity = 0.0;
  for (std::size_t k = 0; k < palette.size(); ++k) {
    for (int ch = 0; ch < 3; ++ch) mix[ch] += alpha[k] * palette[k][ch];
    sparsity += alpha[k] * (1.0 - alpha[k]);
  }
  return squared_distance(mix, pixel) + lambda * sparsity;
}

void project_to_simplex(std::span<double> values) {
  const std::size_t n = values.size();
  if (n == 0) return;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double running = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    running += sorted[j];
    const double candidate = (running - 1.0) / static_cast<double>(j + 1);
    if (sorted[j] - candidate > 0.0) theta = candidate;
  }
  std::size_t positive = 0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < n; ++i) {
    values[i] = std::clamp(values[i] - theta, 0.0, 1.0);
    if (values[i] > 0.0) {
      ++positive;
      last = i;
    }
  }
  if (positive == 1) values[last] = 1.0;
}

namespace {

// On the simplex the sparsity term is lambda - lambda*|a|^2, so E is a
// quadratic and its minimum is a stationary point in the relative interior
// of some face. Solving the KKT system on every face finds it exactly.
void polish_on_faces(const Rgb& pixel, const Palette& palette, double lambda, std::vector<double>& alpha) {
  const std::size_t kk = palette.size();
  double best = unmix_energy(alpha, pixel, palette, lambda);
  std::vector<std::size_t> members;
  std::vector<double> candidate(kk);
  for (std::uint32_t mask = 1; mask < (1u << kk); ++mask) {
    members.clear();
    for (std::size_t k = 0; k < kk; ++k) {
      if (mask & (1u << k)) members.push_back(k);
    }
    const auto m = static_cast<Eigen::Index>(members.size());
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(m + 1, m + 1);
    Eigen::VectorXd rhs(m + 1);
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto& ci = palette[members[i]];
      for (Eigen::Index j = 0; j < m; ++j) {
        const auto& cj = palette[members[j]];
        kkt(i, j) = 2.0 * (ci[0] * cj[0] + ci[1] * cj[1] + ci[2] * cj[2]);
      }
      kkt(i, i) -= 2.0 * lambda;
      kkt(i, m) = kkt(m, i) = 1.0;
      rhs(i) = 2.0 * (ci[0] * pixel[0] + ci[1] * pixel[1] + ci[2] * pixel[2]);
    }
    rhs(m) = 1.0;
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
    if (!lu.isInvertible()) continue;
    const Eigen::VectorXd solution = lu.solve(rhs);

    std::fill(candidate.begin(), candidate.end(), 0.0);
    double sum = 0.0;
    bool feasible = true;
    for (Eigen::Index i = 0; i < m && feasible; ++i) {
      if (!(solution(i) >= -1e-12)) feasible = false;
      candidate[members[i]] = std::max(solution(i), 0.0);
      sum += candidate[members[i]];
    }
    if (!feasible || !(sum > 0.0)) continue;
    for (auto& a : candidate) a /= sum;
    if (m == 1) candidate[members[0]] = 1.0;
    const double e = unmix_energy(candidate, pixel, palette, lambda);
    if (e < best) {
      best = e;
      alpha = candidate;
    }
  }
}

}  // namespace

std::vector<double> unmix_pixel(const Rgb& pixel, const Palette& palette, double lambda, const UnmixOptions& options) {
  const std::size_t kk = palette.size();
  std::vector<double> alpha(kk, 0.0);
  for (std::size_t k = 0; k < kk; ++k) {
    if (bit_equal(palette[k], pixel)) {
      alpha[k] = 1.0;
      return alpha;
    }
  }
  std::fill(alpha.begin(), alpha.end(), 1.0 / static_cast<double>(kk));
  if (kk == 1) {
    alpha[0] = 1.0;
    return alpha;
  }

  std::vector<double> next(kk);
  for (int it = 0; it < options.iterations; ++it) {
    Rgb residual{-pixel[0], -pixel[1], -pixel[2]};
    for (std::size_t k = 0; k < kk; ++k) {
      for (int ch = 0; ch < 3; ++ch) residual[ch] += alpha[k] * palette[k][ch];
    }
    for (std::size_t k = 0; k < kk; ++k) {
      const auto& c = palette[k];
      const double grad =
          2.0 * (c[0] * residual[0] + c[1] * residual[1] + c[2] * residual[2]) + lambda * (1.0 - 2.0 * alpha[k]);
      next[k] = alpha[k] - options.step * grad;
    }
    project_to_simplex(next);
    alpha.swap(next);
  }
  if (kk <= kExactUnmixLayers) polish_on_faces(pixel, palette, lambda, alpha);
  return alpha;
}

double LayerStack::max_clip_error() const noexcept {
  return clip_error.empty() ? 0.0 : *std::max_element(clip_error.begin(), clip_error.end());
}

LayerStack decompose(const RgbImage& image, const Palette& palette, double lambda) {
  if (image.empty()) throw Error(ErrorKind::EmptyImage, "cannot decompose an empty image");
  if (palette.size() == 0) throw Error(ErrorKind::InvalidPalette, "empty palette");
  if (!(lambda >= 0.0)) throw Error(ErrorKind::InvalidArgument, "lambda must be >= 0");

  const std::size_t kk = palette.size();
  LayerStack stack;
  stack.width = image.width();
  stack.height = image.height();
  stack.palette = palette;
  const std::size_t n = image.pixel_count();
  stack.alphas.resize(n * kk);
  stack.colors.resize(n * kk * 3);
  stack.clip_error.resize(n);

  std::unordered_map<ColorKey, std::size_t, ColorKeyHash> memo;
  std::vector<double> memo_alphas;

  for (std::size_t px = 0; px < n; ++px) {
    const Rgb p = image.pixel(px);
    for (double v : p) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "pixel " + std::to_string(px % image.width()) + "," +
                                                    std::to_string(px / image.width()) + " outside [0,1]");
      }
    }
    auto [it, inserted] = memo.try_emplace(key_of(p), memo.size());
    if (inserted) {
      const auto a = unmix_pixel(p, palette, lambda);
      memo_alphas.insert(memo_alphas.end(), a.begin(), a.end());
    }
    const double* a = &memo_alphas[it->second * kk];

    Rgb residual = p;
    for (std::size_t k = 0; k < kk; ++k) {
      for (int ch = 0; ch < 3; ++ch) residual[ch] -= a[k] * palette[k][ch];
    }
    Rgb recon{0, 0, 0};
    for (std::size_t k = 0; k < kk; ++k) {
      stack.alphas[px * kk + k] = a[k];
      double* u = &stack.colors[(px * kk + k) * 3];
      for (int ch = 0; ch < 3; ++ch) {
        // A full-coverage layer must reproduce the pixel itself.
        u[ch] = a[k] == 1.0 ? p[ch] : clamp01(palette[k][ch] + residual[ch]);
        recon[ch] += a[k] * u[ch];
      }
    }
    stack.clip_error[px] = std::max({std::abs(recon[0] - p[0]), std::abs(recon[1] - p[1]), std::abs(recon[2] - p[2])});
  }
  return stack;
}

RgbImage compose(const LayerStack& stack) {
  RgbImage out(stack.width, stack.height);
  const std::size_t kk = stack.layers();
  for (std::size_t px = 0; px < stack.pixel_count(); ++px) {
    Rgb sum{0, 0, 0};
    for (std::size_t k = 0; k < kk; ++k) {
      const double a = stack.alphas[px * kk + k];
      const double* u = &stack.colors[(px * kk + k) * 3];
      for (int ch = 0; ch < 3; ++ch) sum[ch] += a * u[ch];
    }
    out.set_pixel(px, {clamp01(sum[0]), clamp01(sum[1]), clamp01(sum[2])});
  }
  return out;
}

LayerStack recolor(const LayerStack& stack, const Palette& new_palette) {
  const std::size_t kk = stack.layers();
  if (new_palette.size() != kk) {
    throw Error(ErrorKind::PaletteSizeMismatch, "stack has " + std::to_string(kk) + " layers but the new palette has " +
                                                    std::to_string(new_palette.size()) + " colors");
  }
  LayerStack out = stack;
  out.palette = new_palette;
  for (std::size_t k = 0; k < kk; ++k) {
    const Rgb& old_c = stack.palette[k];
    const Rgb& new_c = new_palette[k];
    if (bit_equal(old_c, new_c)) continue;
    for (std::size_t px = 0; px < stack.pixel_count(); ++px) {
      double* u = &out.colors[(px * kk + k) * 3];
      for (int ch = 0; ch < 3; ++ch) u[ch] = clamp01(new_c[ch] + (u[ch] - old_c[ch]));
    }
  }
  return out;
}

LayerStack transfer_palette(const LayerStack& stack, const RgbImage& reference, std::uint64_t seed) {
  if (reference.empty()) throw Error(ErrorKind::EmptyImage, "reference image is empty");
  const auto ref = estimate_palette(reference, static_cast<int>(stack.layers()), seed);
  const auto base_order = stack.palette.luminance_order();
  const auto ref_order = ref.luminance_order();
  std::vector<Rgb> colors(stack.layers());
  for (std::size_t rank = 0; rank < base_order.size(); ++rank) colors[base_order[rank]] = ref[ref_order[rank]];
  return recolor(stack, Palette(std::move(colors)));
}

Bitmap layer_bitmap(const LayerStack& stack, std::size_t k) {
  if (k >= stack.layers()) throw Error(ErrorKind::InvalidArgument, "layer index out of range");
  Bitmap bmp{stack.width, stack.height, 4, {}};
  bmp.bytes.resize(stack.pixel_count() * 4);
  for (std::size_t px = 0; px < stack.pixel_count(); ++px) {
    const Rgb u = stack.color(px, k);
    std::uint8_t* out = &bmp.bytes[px * 4];
    out[0] = to_byte(u[0]);
    out[1] = to_byte(u[1]);
    out[2] = to_byte(u[2]);
    out[3] = to_byte(stack.alpha(px, k));
  }
  return bmp;
}

Bitmap error_map_bitmap(const LayerStack& stack) {
  Bitmap bmp{stack.width, stack.height, 1, {}};
  bmp.bytes.resize(stack.pixel_count());
  for (std::size_t px = 0; px < stack.pixel_count(); ++px) bmp.bytes[px] = to_byte(stack.clip_error[px]);
  return bmp;
}

LayerStack stack_from_layers(const std::vector<Bitmap>& layers, const Palette& palette) {
  if (layers.size() != palette.size()) {
    throw Error(ErrorKind::PaletteSizeMismatch, std::to_string(layers.size()) + " layer images but " +
                                                    std::to_string(palette.size()) + " palette colors");
  }
  LayerStack stack;
  stack.width = layers.front().width;
  stack.height = layers.front().height;
  stack.palette = palette;
  const std::size_t kk = layers.size();
  const std::size_t n = stack.pixel_count();
  if (n == 0) throw Error(ErrorKind::EmptyImage, "layer images are empty");
  for (const auto& layer : layers) {
    if (layer.width != stack.width || layer.height != stack.height || layer.channels != 4) {
      throw Error(ErrorKind::DimensionMismatch, "layer images must be RGBA with identical dimensions");
    }
  }
  stack.alphas.resize(n * kk);
  stack.colors.resize(n * kk * 3);
  stack.clip_error.assign(n, 0.0);
  for (std::size_t px = 0; px < n; ++px) {
    double sum = 0.0;
    for (std::size_t k = 0; k < kk; ++k) {
      const std::uint8_t* b = &layers[k].bytes[px * 4];
      for (int ch = 0; ch < 3; ++ch) stack.colors[(px * kk + k) * 3 + ch] = b[ch] / 255.0;
      stack.alphas[px * kk + k] = b[3];
      sum += b[3];
    }
    for (std::size_t k = 0; k < kk; ++k) {
      double& a = stack.alphas[px * kk + k];
      a = sum > 0.0 ? a / sum : 1.0 / static_cast<double>(kk);
    }
  }
  return stack;
}

void write_palette_json(std::ostream& out, const PaletteDocument& doc) {
  nlohmann::json colors = nlohmann::json::array();
  for (const auto& c : doc.palette.colors()) colors.push_back({c[0], c[1], c[2]});
  const nlohmann::json j = {{"colors", std::move(colors)}, {"lambda", doc.lambda}, {"seed", doc.seed}};
  out << j.dump() << '\n';
}

PaletteDocument read_palette_json(std::istream& in) {
  try {
    const auto j = nlohmann::json::parse(in);
    std::vector<Rgb> colors;
    for (const auto& c : j.at("colors")) {
      if (!c.is_array() || c.size() != 3) throw Error(ErrorKind::InvalidPalette, "palette colors must be [r,g,b]");
      colors.push_back({c[0].get<double>(), c[1].get<double>(), c[2].get<double>()});
    }
    PaletteDocument doc{Palette(std::move(colors)), kDefaultLambda, 0};
    if (j.contains("lambda")) doc.lambda = j["lambda"].get<double>();
    if (j.contains("seed")) doc.seed = j["seed"].get<std::uint64_t>();
    return doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::MalformedRecord, std::string("palette JSON: ") + e.what());
  }
}

}  // namespace ukiyo
