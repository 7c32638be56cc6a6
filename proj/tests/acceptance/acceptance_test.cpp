// Copyright 2026 The ukiyo Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite: prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "cli.hpp"
#include "json.hpp"
#include "test_support.hpp"
#include "ukiyo/color_separation.hpp"
#include "ukiyo/corpus.hpp"
#include "ukiyo/embedding.hpp"
#include "ukiyo/error.hpp"
#include "ukiyo/face_geometry.hpp"
#include "ukiyo/image_io.hpp"
#include "ukiyo/service.hpp"

// After Eigen: <resolv.h> defines _res as a macro.
#include "httplib.h"

namespace fs = std::filesystem;
using namespace ukiyo;
using Clock = std::chrono::steady_clock;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail.clear();
    pass = false;
    if (!detail.empty()) detail += "; ";
    detail += why;
  }
  void note(const std::string& what) {
    if (!pass) return;
    if (!detail.empty()) detail += "; ";
    detail += what;
  }
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// ---------------------------------------------------------------------------
// 1. Feature dimensionality

Verdict feature_dimensionality() {
  Verdict v;
  const auto hq = default_high_quality_set();
  const std::size_t n = hq.size();
  const std::size_t triplets = n * (n - 1) * (n - 2) / 6;
  if (n != 9) v.fail("default set has " + std::to_string(n) + " kinds");
  if (3 * triplets != 252) v.fail("3*C(n,3) = " + std::to_string(3 * triplets));

  std::mt19937_64 rng(1);
  std::vector<LandmarkSet> faces;
  for (int i = 0; i < 1000; ++i) faces.push_back(testing::random_face(rng, "syn" + std::to_string(i)));
  const auto start = Clock::now();
  const auto batch = extract_features(faces, hq);
  const double elapsed = seconds_since(start);

  if (!batch.rejected.empty()) v.fail(std::to_string(batch.rejected.size()) + " faces rejected");
  if (batch.features.size() != 1000) v.fail("got " + std::to_string(batch.features.size()) + " vectors");
  for (const auto& f : batch.features) {
    if (f.angles.size() != 252) {
      v.fail(f.face_id + " has " + std::to_string(f.angles.size()) + " angles");
      break;
    }
  }
  if (elapsed >= 1.0) v.fail("1000 faces took " + fmt("%.3f", elapsed) + " s");
  v.note("9 kinds, 252 angles/face, 1000 faces in " + fmt("%.3f", elapsed) + " s");
  return v;
}

// ---------------------------------------------------------------------------
// 2. Invariance suite

Verdict invariance_suite() {
  Verdict v;
  const auto hq = default_high_quality_set();
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  std::uniform_real_distribution<double> scale(0.25, 4.0);
  std::uniform_real_distribution<double> shift(-500.0, 500.0);

  double worst_similarity = 0.0;
  double worst_reflection = 0.0;
  double worst_sum = 0.0;
  for (int i = 0; i < 200; ++i) {
    const auto face = testing::random_face(rng, "inv" + std::to_string(i));
    const double theta = angle(rng);
    const double s = scale(rng);
    const double tx = shift(rng);
    const double ty = shift(rng);
    const auto moved = testing::map_pixels(face, [&](double x, double y) {
      return std::array<double, 2>{s * (std::cos(theta) * x - std::sin(theta) * y) + tx,
                                   s * (std::sin(theta) * x + std::cos(theta) * y) + ty};
    });

    const auto base = angle_features(face, hq).angles;
    const auto sim = angle_features(moved, hq).angles;
    const auto left = angle_features(normalize_left(moved), hq).angles;
    const auto mirrored = angle_features(normalize_left(reflect(moved)), hq).angles;
    for (std::size_t j = 0; j < base.size(); ++j) {
      worst_similarity = std::max(worst_similarity, std::abs(base[j] - sim[j]));
      worst_reflection = std::max(worst_reflection, std::abs(left[j] - mirrored[j]));
    }
    for (const auto* vec : {&base, &sim, &mirrored}) {
      for (std::size_t t = 0; t + 2 < vec->size(); t += 3) {
        worst_sum = std::max(worst_sum, std::abs((*vec)[t] + (*vec)[t + 1] + (*vec)[t + 2] - 180.0));
      }
    }
  }
  if (worst_similarity > 1e-9) v.fail("similarity drift " + fmt("%.3g", worst_similarity) + " deg");
  if (worst_reflection > 1e-9) v.fail("reflection drift " + fmt("%.3g", worst_reflection) + " deg");
  if (worst_sum > 1e-6) v.fail("triplet sum off by " + fmt("%.3g", worst_sum) + " deg");
  v.note("200 faces; max drift similarity " + fmt("%.2g", worst_similarity) + ", reflection " +
         fmt("%.2g", worst_reflection) + ", sum " + fmt("%.2g", worst_sum));
  return v;
}

// ---------------------------------------------------------------------------
// 3. Quality selection fixture

Verdict quality_selection() {
  Verdict v;
  using K = LandmarkKind;
  // Mean pixel errors for 69 expert-labelled paintings.
  const std::vector<std::pair<K, double>> table = {
      {K::LeftEyeCenter, 10.2},   {K::RightEyeCenter, 18.5},   {K::MouthLeft, 9.7},         {K::MouthRight, 13.4},
      {K::NoseCenter, 22.1},      {K::NoseLeft, 18.6},         {K::NoseRight, 16.5},        {K::LeftEyebrowLeft, 34.2},
      {K::LeftEyebrowRight, 43.0}, {K::LeftEyebrowUp, 23.1},   {K::RightEyebrowLeft, 17.4}, {K::RightEyebrowRight, 41.8},
      {K::RightEyebrowUp, 53.1},  {K::JawUpperLeft, 69.4},     {K::JawUpperRight, 57.4},    {K::JawMidLeft, 25.0},
      {K::JawMidRight, 56.2},     {K::ChinBottom, 57.8},
  };
  QualityReport report;
  report.pair_count = 69;
  for (const auto& [kind, err] : table) report.per_kind[kind] = {err, 69};

  const HighQualitySet expected{K::LeftEyeCenter, K::RightEyeCenter, K::MouthLeft,   K::MouthRight, K::NoseLeft,
                                K::NoseRight,     K::JawUpperRight,  K::JawMidRight, K::ChinBottom};
  HighQualitySet got;
  try {
    got = select_high_quality(report, 20.0, {K::JawUpperRight, K::JawMidRight, K::ChinBottom}, {K::RightEyebrowLeft});
  } catch (const Error& e) {
    v.fail(e.what());
    return v;
  }
  if (got != expected) {
    std::string names;
    for (auto k : got) names += std::string(landmark_name(k)) + " ";
    v.fail("selected " + names);
  }
  if (default_high_quality_set() != expected) v.fail("built-in default differs from the fixture selection");
  for (const auto& [kind, err] : reference_quality_table().per_kind) {
    const auto it = std::find_if(table.begin(), table.end(), [&](const auto& e) { return e.first == kind; });
    if (it == table.end() || it->second != err.mean_error_px) v.fail("built-in table differs at " + std::string(landmark_name(kind)));
  }
  v.note("9 kinds selected, " + std::to_string(3 * 84) + " angles");
  return v;
}

// ---------------------------------------------------------------------------
// 4. PCA / LDA oracles

Verdict pca_lda_oracles() {
  Verdict v;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(1000 + seed);
    std::normal_distribution<double> g(0.0, 1.0);
    FeatureMatrix x;
    x.values.resize(8, 6);
    testing::Matrix rows(8, std::vector<double>(6));
    for (int r = 0; r < 8; ++r) {
      x.ids.push_back(std::to_string(r));
      for (int c = 0; c < 6; ++c) rows[r][c] = x.values(r, c) = g(rng);
    }
    const auto oracle = testing::jacobi_eigen(testing::covariance(rows));
    LinearProjection p;
    try {
      p = pca_fit(x, 6);
    } catch (const Error& e) {
      v.fail(std::string("pca_fit: ") + e.what());
      return v;
    }
    for (int j = 0; j < 6; ++j) {
      double dot = 0.0;
      for (int i = 0; i < 6; ++i) dot += p.components(i, j) * oracle.vectors[j][i];
      const double sign = dot < 0.0 ? -1.0 : 1.0;
      for (int i = 0; i < 6; ++i) worst = std::max(worst, std::abs(p.components(i, j) - sign * oracle.vectors[j][i]));
      worst = std::max(worst, std::abs(p.strengths(j) - oracle.values[j]) / std::max(1.0, oracle.values[0]));
    }
  }
  if (worst > 1e-8) v.fail("PCA deviates from the covariance eigenvectors by " + fmt("%.3g", worst));

  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 1.0);
  FeatureMatrix blobs;
  blobs.values.resize(100, 4);
  blobs.labels.emplace();
  for (int r = 0; r < 100; ++r) {
    const bool second = r % 2 == 1;
    blobs.ids.push_back(std::to_string(r));
    blobs.labels->push_back(second ? "B" : "A");
    for (int c = 0; c < 4; ++c) blobs.values(r, c) = (second ? 10.0 : 0.0) + g(rng);
  }
  double a_min = INFINITY, a_max = -INFINITY, b_min = INFINITY, b_max = -INFINITY;
  try {
    const auto e = project(blobs, lda_fit(blobs, 1));
    for (int r = 0; r < 100; ++r) {
      const double z = e.coords(r, 0);
      if (r % 2) {
        b_min = std::min(b_min, z);
        b_max = std::max(b_max, z);
      } else {
        a_min = std::min(a_min, z);
        a_max = std::max(a_max, z);
      }
    }
  } catch (const Error& e) {
    v.fail(std::string("lda_fit: ") + e.what());
    return v;
  }
  const bool separated = a_max < b_min || b_max < a_min;
  if (!separated) v.fail("LDA classes overlap");
  v.note("PCA max deviation " + fmt("%.2g", worst) + " over 20 matrices; LDA gap " +
         fmt("%.3g", std::max(b_min - a_max, a_min - b_max)));
  return v;
}

// ---------------------------------------------------------------------------
// 5. t-SNE sanity

Verdict tsne_sanity() {
  Verdict v;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> center(-20.0, 20.0);
  constexpr int kDim = 10;
  std::vector<std::vector<double>> centers(3, std::vector<double>(kDim));
  for (auto& c : centers) {
    for (auto& x : c) x = center(rng);
  }
  FeatureMatrix x;
  x.values.resize(60, kDim);
  std::vector<int> blob(60);
  for (int r = 0; r < 60; ++r) {
    blob[r] = r % 3;
    x.ids.push_back(std::to_string(r));
    for (int c = 0; c < kDim; ++c) x.values(r, c) = centers[blob[r]][c] + g(rng);
  }
  TsneOptions options;
  options.perplexity = 10.0;
  options.seed = 5;
  const auto start = Clock::now();
  TsneResult result;
  try {
    result = tsne_embed(x, options);
  } catch (const Error& e) {
    v.fail(e.what());
    return v;
  }
  const double elapsed = seconds_since(start);

  double same = 0.0, cross = 0.0;
  int n_same = 0, n_cross = 0;
  const auto& y = result.embedding.coords;
  for (int i = 0; i < 60; ++i) {
    for (int j = i + 1; j < 60; ++j) {
      const double d = (y.row(i) - y.row(j)).norm();
      if (blob[i] == blob[j]) {
        same += d;
        ++n_same;
      } else {
        cross += d;
        ++n_cross;
      }
    }
  }
  same /= n_same;
  cross /= n_cross;
  if (!(result.final_kl < result.initial_kl)) {
    v.fail("KL did not decrease: " + fmt("%.4f", result.initial_kl) + " -> " + fmt("%.4f", result.final_kl));
  }
  if (!(same < cross)) v.fail("same-blob distance " + fmt("%.3f", same) + " >= cross-blob " + fmt("%.3f", cross));
  if (elapsed >= 30.0) v.fail("took " + fmt("%.1f", elapsed) + " s");
  v.note("KL " + fmt("%.3f", result.initial_kl) + " -> " + fmt("%.3f", result.final_kl) + ", mean dist same " +
         fmt("%.2f", same) + " < cross " + fmt("%.2f", cross) + ", " + fmt("%.2f", elapsed) + " s");
  return v;
}

// ---------------------------------------------------------------------------
// 6. Unmixing oracle

Verdict unmixing_oracle() {
  Verdict v;
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst_gap = -INFINITY;
  double worst_feasibility = 0.0;
  int checks = 0;
  for (int c = 0; c < 100; ++c) {
    const std::size_t k = c % 2 == 0 ? 2 : 3;
    std::vector<Rgb> colors;
    while (colors.size() < k) {
      const Rgb candidate{unit(rng), unit(rng), unit(rng)};
      const bool distinct = std::all_of(colors.begin(), colors.end(), [&](const Rgb& o) {
        return std::hypot(o[0] - candidate[0], o[1] - candidate[1], o[2] - candidate[2]) > 1e-6;
      });
      if (distinct) colors.push_back(candidate);
    }
    const Rgb pixel{unit(rng), unit(rng), unit(rng)};
    const Palette palette(colors);
    for (double lambda : {0.0, 0.05}) {
      const auto alpha = unmix_pixel(pixel, palette, lambda);
      double sum = 0.0;
      for (double a : alpha) {
        sum += a;
        if (a < 0.0) worst_feasibility = std::max(worst_feasibility, -a);
        if (a > 1.0) worst_feasibility = std::max(worst_feasibility, a - 1.0);
      }
      worst_feasibility = std::max(worst_feasibility, std::abs(sum - 1.0));
      const auto grid = testing::simplex_grid_minimum(pixel, colors, lambda, 1000);
      const double gap = testing::reference_energy(alpha, pixel, colors, lambda) - grid.energy;
      worst_gap = std::max(worst_gap, gap);
      ++checks;
    }
  }
  if (worst_gap > 1e-6) v.fail("energy exceeds grid optimum by " + fmt("%.3g", worst_gap));
  if (worst_feasibility > 1e-9) v.fail("simplex violation " + fmt("%.3g", worst_feasibility));
  v.note(std::to_string(checks) + " checks; worst energy - grid optimum = " + fmt("%.3g", worst_gap));
  return v;
}

// ---------------------------------------------------------------------------
// 7. Decompose / compose round trip

std::vector<Rgb> spread_palette(std::mt19937_64& rng, std::size_t k) {
  std::uniform_real_distribution<double> unit(0.1, 0.9);
  std::vector<Rgb> colors;
  while (colors.size() < k) {
    const Rgb c{unit(rng), unit(rng), unit(rng)};
    const bool far = std::all_of(colors.begin(), colors.end(), [&](const Rgb& o) {
      return std::hypot(o[0] - c[0], o[1] - c[1], o[2] - c[2]) > 0.25;
    });
    if (far) colors.push_back(c);
  }
  return colors;
}

Verdict round_trip() {
  Verdict v;
  const auto start = Clock::now();
  int worst_levels = 0;
  std::size_t lloyd_steps = 0;
  for (int i = 0; i < 10; ++i) {
    std::mt19937_64 rng(700 + i);
    const auto colors = spread_palette(rng, 4);
    const auto image = testing::in_hull_image(rng, 256, 256, colors);
    const auto stack = decompose(image, Palette(colors), kDefaultLambda);
    const auto a = to_bitmap(compose(stack));
    const auto b = to_bitmap(image);
    for (std::size_t j = 0; j < a.bytes.size(); ++j) worst_levels = std::max(worst_levels, std::abs(int(a.bytes[j]) - int(b.bytes[j])));

    const auto fit = fit_palette(image, 4, static_cast<std::uint64_t>(i));
    lloyd_steps += fit.inertia.size();
    for (std::size_t s = 1; s < fit.inertia.size(); ++s) {
      if (fit.inertia[s] > fit.inertia[s - 1]) {
        v.fail("inertia rose at image " + std::to_string(i) + " step " + std::to_string(s) + " (" +
               fmt("%.17g", fit.inertia[s - 1]) + " -> " + fmt("%.17g", fit.inertia[s]) + ")");
        break;
      }
    }
  }
  if (worst_levels > 2) v.fail("round-trip error " + std::to_string(worst_levels) + "/255");

  const Rgb c0{0.85, 0.35, 0.1};
  const Rgb c1{0.05, 0.2, 0.45};
  const auto two = testing::striped_image(64, 64, {c0, c1});
  const auto palette = estimate_palette(two, 2, 0);
  const bool recovered = (palette[0] == c0 && palette[1] == c1) || (palette[0] == c1 && palette[1] == c0);
  if (!recovered) v.fail("2-color palette not recovered exactly");
  const double elapsed = seconds_since(start);
  if (elapsed >= 60.0) v.fail("took " + fmt("%.1f", elapsed) + " s");
  v.note("10 images 256x256 K=4, max error " + std::to_string(worst_levels) + "/255, " + std::to_string(lloyd_steps) +
         " Lloyd steps monotone, 2-color exact, " + fmt("%.1f", elapsed) + " s");
  return v;
}

// ---------------------------------------------------------------------------
// 8. Recolor correctness

Verdict recolor_correctness() {
  Verdict v;
  std::mt19937_64 rng(8);
  const auto colors = spread_palette(rng, 4);
  const auto image = testing::in_hull_image(rng, 64, 64, colors);
  const auto stack = decompose(image, estimate_palette(image, 4, 8), kDefaultLambda);
  const auto same = recolor(stack, stack.palette);
  if (!(same == stack)) v.fail("identity recolor changed the stack");
  if (encode_png(to_bitmap(compose(same))) != encode_png(to_bitmap(compose(stack)))) v.fail("identity recolor changed the PNG");

  const Rgb a{0.9, 0.6, 0.1};
  const Rgb b{0.1, 0.25, 0.6};
  const auto two = testing::striped_image(32, 16, {a, b});
  const auto two_stack = decompose(two, estimate_palette(two, 2, 0), kDefaultLambda);
  const auto swapped = compose(recolor(two_stack, Palette({two_stack.palette[1], two_stack.palette[0]})));
  std::size_t wrong = 0;
  for (std::size_t px = 0; px < two.pixel_count(); ++px) {
    const Rgb expect = two.pixel(px) == a ? b : a;
    if (swapped.pixel(px) != expect) ++wrong;
  }
  if (wrong) v.fail(std::to_string(wrong) + " pixels not exactly swapped");
  v.note("identity recolor bit-equal; swap exact on " + std::to_string(two.pixel_count()) + " pixels");
  return v;
}

// ---------------------------------------------------------------------------
// 9. Determinism

struct Fixture {
  fs::path root;
  fs::path landmarks, metadata, images, art, reference, palette_edit, labels;
};

Fixture make_fixture(const fs::path& root) {
  Fixture f;
  f.root = root;
  fs::create_directories(root);
  std::mt19937_64 rng(9);
  std::vector<LandmarkSet> sets;
  for (int i = 0; i < 24; ++i) {
    auto s = testing::random_face(rng, "print" + std::to_string(i % 6), i / 6);
    s.image_width = 80;
    s.image_height = 60;
    sets.push_back(s);
  }
  f.landmarks = root / "landmarks.jsonl";
  {
    std::ofstream out(f.landmarks);
    write_landmarks(out, sets);
  }
  f.metadata = root / "meta.csv";
  {
    std::ofstream out(f.metadata);
    out << "object_id,title,painter,format,year\n";
    const char* painters[] = {"Hirosada", "Kunisada", "Hirosada", "Kuniyoshi", "", "Kunisada"};
    for (int i = 0; i < 6; ++i) out << "print" << i << ",Title " << i << "," << painters[i] << ",oban," << 1840 + 3 * i << "\n";
  }
  f.labels = root / "labels.csv";
  {
    std::ofstream out(f.labels);
    out << "face_id,label\n";
    for (const auto& s : sets) out << s.face_id() << "," << (s.face_index % 2 ? "a" : "b") << "\n";
  }
  f.images = root / "images";
  fs::create_directories(f.images);
  for (int i = 0; i < 6; ++i) {
    const auto pal = spread_palette(rng, 3);
    save_png(f.images / ("print" + std::to_string(i) + ".png"), testing::in_hull_image(rng, 80, 60, pal));
  }
  f.art = root / "art.png";
  save_png(f.art, testing::in_hull_image(rng, 96, 64, spread_palette(rng, 4)));
  f.reference = root / "reference.png";
  save_png(f.reference, testing::in_hull_image(rng, 48, 48, spread_palette(rng, 4)));
  f.palette_edit = root / "edit.json";
  {
    std::ofstream out(f.palette_edit);
    write_palette_json(out, {Palette({{0.1, 0.1, 0.3}, {0.5, 0.2, 0.2}, {0.3, 0.7, 0.4}, {0.9, 0.85, 0.6}}), 0.05, 0});
  }
  return f;
}

// Runs every file-producing subcommand into `out`; returns captured stdout
// per step, or an error description.
std::map<std::string, std::string> run_pipeline(const Fixture& f, const fs::path& out, std::string& error) {
  fs::create_directories(out);
  const auto s = [](const fs::path& p) { return p.string(); };
  const std::vector<std::pair<std::string, std::vector<std::string>>> steps = {
      {"ingest", {"ingest", "--metadata", s(f.metadata), "--landmarks", s(f.landmarks), "--out", s(out / "corpus.jsonl")}},
      {"stats", {"stats", "--corpus", s(out / "corpus.jsonl"), "--bin-width", "5", "--histogram-out", s(out / "hist.csv"),
                 "--painters-out", s(out / "painters.csv")}},
      {"stats-stdout", {"stats", "--corpus", s(out / "corpus.jsonl")}},
      {"align", {"align", "--landmarks", s(f.landmarks), "--images", s(f.images), "--out", s(out / "crops"), "--size", "48"}},
      {"features", {"features", "--landmarks", s(out / "corpus.jsonl"), "--hq", "default", "--out", s(out / "features.csv")}},
      {"quality", {"quality", "--detected", s(f.landmarks), "--expert", s(f.landmarks), "--out", s(out / "quality.csv"),
                   "--hq-out", s(out / "hq.txt"), "--threshold", "1", "--jaw-exceptions", "none"}},
      {"quality-reference", {"quality", "--report", "reference"}},
      {"embed-pca", {"embed", "--features", s(out / "features.csv"), "--method", "pca", "--standardize", "--corpus",
                     s(out / "corpus.jsonl"), "--out", s(out / "pca.csv"), "--projection-out", s(out / "pca.json")}},
      {"embed-lda", {"embed", "--features", s(out / "features.csv"), "--method", "lda", "--k", "1", "--labels",
                     s(f.labels), "--out", s(out / "lda.csv"), "--projection-out", s(out / "lda.json")}},
      {"embed-tsne", {"embed", "--features", s(out / "features.csv"), "--method", "tsne", "--perplexity", "5",
                      "--seed", "3", "--out", s(out / "tsne.csv")}},
      {"separate", {"separate", "--in", s(f.art), "--k", "4", "--seed", "2", "--error-map", "--out", s(out / "layers")}},
      {"compose", {"compose", "--layers", s(out / "layers" / "art"), "--out", s(out / "composed.png")}},
      {"recolor", {"recolor", "--layers", s(out / "layers" / "art"), "--palette", s(f.palette_edit), "--out",
                   s(out / "recolored.png")}},
      {"transfer", {"transfer", "--layers", s(out / "layers" / "art"), "--reference", s(f.reference), "--seed", "2",
                    "--out", s(out / "transferred.png")}},
  };
  std::map<std::string, std::string> stdout_by_step;
  for (const auto& [name, args] : steps) {
    std::vector<std::string> argv{"ukiyo"};
    argv.insert(argv.end(), args.begin(), args.end());
    std::ostringstream so, se;
    const int code = cli::run(argv, so, se);
    if (code != 0) {
      error = name + " exited " + std::to_string(code) + ": " + se.str();
      return {};
    }
    stdout_by_step[name] = so.str();
  }
  return stdout_by_step;
}

std::map<std::string, std::string> tree_contents(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file()) files[fs::relative(entry.path(), root).string()] = slurp(entry.path());
  }
  return files;
}

// Decompose + layers + recolor through a fresh service instance.
std::vector<std::string> service_outputs(const Fixture& f, std::string& error) {
  ServiceOptions options;
  options.port = 0;
  Service service(options);
  const int port = service.bind();
  std::thread server([&] { service.listen(); });
  std::vector<std::string> outputs;
  {
    httplib::Client client("127.0.0.1", port);
    client.set_read_timeout(60, 0);
    const httplib::MultipartFormDataItems items{{"image", slurp(f.art), "art.png", "image/png"}};
    auto res = client.Post("/api/decompose?k=4&seed=2", items);
    if (!res || res->status != 200) {
      error = "serve: decompose failed";
    } else {
      auto body = nlohmann::json::parse(res->body);
      const std::string id = body["session_id"];
      body.erase("session_id");
      outputs.push_back(body.dump());
      for (int k = 0; k < 4; ++k) {
        auto layer = client.Get("/api/sessions/" + id + "/layers/" + std::to_string(k));
        outputs.push_back(layer ? layer->body : "");
      }
      const nlohmann::json edit = {{"colors", {{0.1, 0.1, 0.3}, {0.5, 0.2, 0.2}, {0.3, 0.7, 0.4}, {0.9, 0.85, 0.6}}}};
      auto recolored = client.Post("/api/sessions/" + id + "/recolor", edit.dump(), "application/json");
      outputs.push_back(recolored ? recolored->body : "");
    }
  }
  service.stop();
  server.join();
  return outputs;
}

Verdict determinism() {
  Verdict v;
  testing::TempDir dir("acceptance");
  const auto fixture = make_fixture(dir / "inputs");
  const auto inputs_before = tree_contents(dir / "inputs");

  std::string error;
  const auto stdout_a = run_pipeline(fixture, dir / "run_a", error);
  if (!error.empty()) {
    v.fail(error);
    return v;
  }
  const auto stdout_b = run_pipeline(fixture, dir / "run_b", error);
  if (!error.empty()) {
    v.fail(error);
    return v;
  }
  const auto files_a = tree_contents(dir / "run_a");
  const auto files_b = tree_contents(dir / "run_b");
  if (files_a.size() != files_b.size()) v.fail("runs produced different file sets");
  std::size_t differing = 0;
  for (const auto& [name, bytes] : files_a) {
    const auto it = files_b.find(name);
    if (it == files_b.end() || it->second != bytes) {
      ++differing;
      v.fail(name + " differs");
    }
  }
  for (const auto& [step, text] : stdout_a) {
    if (stdout_b.at(step) != text) v.fail(step + " stdout differs");
  }
  if (tree_contents(dir / "inputs") != inputs_before) v.fail("an input file was modified");

  const auto serve_a = service_outputs(fixture, error);
  const auto serve_b = error.empty() ? service_outputs(fixture, error) : std::vector<std::string>{};
  if (!error.empty()) {
    v.fail(error);
  } else if (serve_a != serve_b || serve_a.size() != 6) {
    v.fail("serve responses differ between runs");
  }
  v.note(std::to_string(files_a.size()) + " output files + " + std::to_string(stdout_a.size()) +
         " stdout streams identical across 2 runs of 11 subcommands; serve responses identical");
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"feature dimensionality", feature_dimensionality},
      {"invariance suite", invariance_suite},
      {"quality selection fixture", quality_selection},
      {"PCA/LDA oracles", pca_lda_oracles},
      {"t-SNE sanity", tsne_sanity},
      {"unmixing oracle", unmixing_oracle},
      {"decompose/compose round trip", round_trip},
      {"recolor correctness", recolor_correctness},
      {"determinism", determinism},
  };
  int passed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v.fail(std::string("exception: ") + e.what());
    }
    passed += v.pass ? 1 : 0;
    std::cout << "criterion " << i + 1 << " [" << criteria[i].first << "]: " << (v.pass ? "PASS" : "FAIL") << " - "
              << v.detail << std::endl;
  }
  std::cout << passed << "/" << criteria.size() << " criteria passed" << std::endl;
  return passed == static_cast<int>(criteria.size()) ? 0 : 1;
}
