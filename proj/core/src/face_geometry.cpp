// Copyright 2026 The ukiyo Authors
// SPDX-License-Identifier: Apache-2.0

#include "ukiyo/face_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "ukiyo/csv.hpp"
#include "ukiyo/error.hpp"

namespace ukiyo {
namespace {

using Kind = LandmarkKind;

Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
Point2 midpoint(Point2 a, Point2 b) { return {0.5 * (a.x + b.x), 0.5 * (a.y + b.y)}; }
Point2 rot90(Point2 p) { return {-p.y, p.x}; }
double norm(Point2 p) { return std::hypot(p.x, p.y); }

// Angle between two edge vectors in degrees. atan2(|cross|, dot) equals the
// arccos of the normalized dot product but keeps full precision near 0 and 180.
double vertex_angle(Point2 u, Point2 v) {
  const double cross = u.x * v.y - u.y * v.x;
  const double dot = u.x * v.x + u.y * v.y;
  return std::atan2(std::abs(cross), dot) * (180.0 / std::numbers::pi);
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

}  // namespace

Facing facing_direction(const LandmarkSet& landmarks) {
  const Point2 nose = landmarks.at(Kind::NoseCenter);
  const Point2 eyes = midpoint(landmarks.at(Kind::LeftEyeCenter), landmarks.at(Kind::RightEyeCenter));
  return nose.x > eyes.x ? Facing::Right : Facing::Left;
}

LandmarkSet reflect(const LandmarkSet& landmarks) {
  LandmarkSet out = landmarks;
  for (auto kind : all_landmark_kinds()) {
    auto& target = out[mirror(kind)];
    if (const auto& p = landmarks[kind]) {
      target = Point2{1.0 - p->x, p->y};
    } else {
      target.reset();
    }
  }
  return out;
}

LandmarkSet normalize_left(const LandmarkSet& landmarks) {
  return facing_direction(landmarks) == Facing::Right ? reflect(landmarks) : landmarks;
}

Point2 AlignmentQuad::center() const noexcept {
  return {0.25 * (corners[0].x + corners[1].x + corners[2].x + corners[3].x),
          0.25 * (corners[0].y + corners[1].y + corners[2].y + corners[3].y)};
}

AlignmentQuad alignment_quad(const LandmarkSet& landmarks) {
  const Point2 left_eye = landmarks.at(Kind::LeftEyeCenter);
  const Point2 right_eye = landmarks.at(Kind::RightEyeCenter);
  const Point2 mouth = midpoint(landmarks.at(Kind::MouthLeft), landmarks.at(Kind::MouthRight));

  const Point2 eye_to_eye = right_eye - left_eye;
  const Point2 eye_mid = midpoint(left_eye, right_eye);
  const Point2 eye_to_mouth = mouth - eye_mid;
  const double eye_span = norm(eye_to_eye);
  const double mouth_span = norm(eye_to_mouth);
  if (eye_span == 0.0 || mouth_span == 0.0) {
    throw Error(ErrorKind::DegenerateFace, "face " + landmarks.face_id() +
                                               (eye_span == 0.0 ? ": eye centers coincide"
                                                                : ": mouth midpoint coincides with eye midpoint"));
  }

  Point2 x = eye_to_eye - rot90(eye_to_mouth);
  const double x_len = norm(x);
  if (x_len == 0.0) throw Error(ErrorKind::DegenerateFace, "face " + landmarks.face_id() + ": degenerate frame axis");
  x = (std::max(2.0 * eye_span, 1.8 * mouth_span) / x_len) * x;
  const Point2 y = rot90(x);
  const Point2 c = eye_mid + 0.1 * eye_to_mouth;

  AlignmentQuad quad;
  quad.corners = {c - x - y, c - x + y, c + x + y, c + x - y};
  quad.side_length = 2.0 * norm(x);
  return quad;
}

RgbImage crop_face(const RgbImage& image, const AlignmentQuad& quad, int out_size) {
  if (image.empty()) throw Error(ErrorKind::EmptyImage, "cannot crop from an empty image");
  if (out_size < kMinCropSize) {
    throw Error(ErrorKind::InvalidArgument,
                "crop size must be >= " + std::to_string(kMinCropSize) + ", got " + std::to_string(out_size));
  }
  const auto& [tl, bl, br, tr] = quad.corners;
  const Point2 du = tr - tl;
  const Point2 dv = bl - tl;
  const Point2 twist = (br - tr) - (bl - tl);
  const int w = image.width();
  const int h = image.height();

  const auto sample = [&](double sx, double sy) {
    const double fx0 = std::floor(sx);
    const double fy0 = std::floor(sy);
    const double ax = sx - fx0;
    const double ay = sy - fy0;
    const auto clamp_x = [w](double v) { return static_cast<int>(std::clamp(v, 0.0, static_cast<double>(w - 1))); };
    const auto clamp_y = [h](double v) { return static_cast<int>(std::clamp(v, 0.0, static_cast<double>(h - 1))); };
    const int x0 = clamp_x(fx0), x1 = clamp_x(fx0 + 1.0);
    const int y0 = clamp_y(fy0), y1 = clamp_y(fy0 + 1.0);
    const Rgb p00 = image.pixel(x0, y0), p10 = image.pixel(x1, y0);
    const Rgb p01 = image.pixel(x0, y1), p11 = image.pixel(x1, y1);
    Rgb out{};
    for (int c = 0; c < 3; ++c) {
      const double top = p00[c] + ax * (p10[c] - p00[c]);
      const double bottom = p01[c] + ax * (p11[c] - p01[c]);
      out[c] = top + ay * (bottom - top);
    }
    return out;
  };

  RgbImage out(out_size, out_size);
  for (int row = 0; row < out_size; ++row) {
    const double v = (row + 0.5) / out_size;
    for (int col = 0; col < out_size; ++col) {
      const double u = (col + 0.5) / out_size;
      const Point2 p = tl + u * du + v * dv + (u * v) * twist;
      out.set_pixel(col, row, sample(p.x * w - 0.5, p.y * h - 0.5));
    }
  }
  return out;
}

QualityReport quality_report(const std::vector<LandmarkSet>& detected, const std::vector<LandmarkSet>& expert) {
  std::map<std::pair<std::string, int>, const LandmarkSet*> expert_by_key;
  for (const auto& e : expert) expert_by_key.emplace(std::make_pair(e.image_id, e.face_index), &e);

  std::array<double, kLandmarkCount> sums{};
  std::array<std::size_t, kLandmarkCount> counts{};
  QualityReport report;
  for (const auto& d : detected) {
    const auto it = expert_by_key.find({d.image_id, d.face_index});
    if (it == expert_by_key.end()) continue;
    const LandmarkSet& e = *it->second;

    Facing facing;
    try {
      facing = facing_direction(e);
    } catch (const Error&) {
      facing = facing_direction(d);
    }
    const LandmarkSet dn = facing == Facing::Right ? reflect(d) : d;
    const LandmarkSet en = facing == Facing::Right ? reflect(e) : e;

    ++report.pair_count;
    for (auto kind : all_landmark_kinds()) {
      if (!dn.has(kind) || !en.has(kind)) continue;
      const Point2 a = *dn[kind];
      const Point2 b = *en[kind];
      const double dx = (a.x - b.x) * en.image_width;
      const double dy = (a.y - b.y) * en.image_height;
      sums[index_of(kind)] += std::hypot(dx, dy);
      ++counts[index_of(kind)];
    }
  }
  if (report.pair_count == 0) {
    throw Error(ErrorKind::NoPairedSamples, "no detected face shares (image_id, face_index) with an expert annotation");
  }
  for (auto kind : all_landmark_kinds()) {
    const auto i = index_of(kind);
    if (counts[i] > 0) report.per_kind[kind] = {sums[i] / static_cast<double>(counts[i]), counts[i]};
  }
  return report;
}

void write_quality_csv(std::ostream& out, const QualityReport& report) {
  out << "kind,mean_error_px,n_samples\n";
  char buf[64];
  for (const auto& [kind, err] : report.per_kind) {
    std::snprintf(buf, sizeof buf, "%.6f", err.mean_error_px);
    out << landmark_name(kind) << ',' << buf << ',' << err.samples << '\n';
  }
}

QualityReport read_quality_csv(std::istream& in) {
  const auto rows = csv::read(in);
  if (rows.empty()) throw Error(ErrorKind::MalformedRecord, "quality report CSV is empty");
  const auto kind_col = csv::column(rows[0], "kind");
  const auto mean_col = csv::column(rows[0], "mean_error_px");
  const auto n_col = csv::column(rows[0], "n_samples");
  if (!kind_col || !mean_col) {
    throw Error(ErrorKind::MalformedRecord, "quality report CSV needs columns kind,mean_error_px[,n_samples]");
  }
  QualityReport report;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& f = rows[r].fields;
    const auto where = "quality report line " + std::to_string(rows[r].line) + ": ";
    if (f.size() <= std::max(*kind_col, *mean_col)) throw Error(ErrorKind::MalformedRecord, where + "too few fields");
    const auto kind = landmark_from_name(trim(f[*kind_col]));
    if (!kind) throw Error(ErrorKind::UnknownLandmarkName, where + "unknown landmark \"" + f[*kind_col] + "\"");
    KindError err;
    try {
      std::size_t used = 0;
      err.mean_error_px = std::stod(f[*mean_col], &used);
      if (n_col && *n_col < f.size() && !trim(f[*n_col]).empty()) err.samples = std::stoul(f[*n_col]);
    } catch (const std::exception&) {
      throw Error(ErrorKind::MalformedRecord, where + "non-numeric value");
    }
    if (!(err.mean_error_px >= 0.0)) throw Error(ErrorKind::MalformedRecord, where + "negative or NaN error");
    report.per_kind[*kind] = err;
    report.pair_count = std::max(report.pair_count, err.samples);
  }
  return report;
}

QualityReport reference_quality_table() {
  constexpr std::size_t kPaintings = 69;
  const std::pair<Kind, double> table[] = {
      {Kind::LeftEyeCenter, 10.2},    {Kind::RightEyeCenter, 18.5},    {Kind::MouthLeft, 9.7},
      {Kind::MouthRight, 13.4},       {Kind::NoseCenter, 22.1},        {Kind::NoseLeft, 18.6},
      {Kind::NoseRight, 16.5},        {Kind::LeftEyebrowLeft, 34.2},   {Kind::LeftEyebrowRight, 43.0},
      {Kind::LeftEyebrowUp, 23.1},    {Kind::RightEyebrowLeft, 17.4},  {Kind::RightEyebrowRight, 41.8},
      {Kind::RightEyebrowUp, 53.1},   {Kind::JawUpperLeft, 69.4},      {Kind::JawUpperRight, 57.4},
      {Kind::JawMidLeft, 25.0},       {Kind::JawMidRight, 56.2},       {Kind::ChinBottom, 57.8},
  };
  QualityReport report;
  report.pair_count = kPaintings;
  for (auto [kind, err] : table) report.per_kind[kind] = {err, kPaintings};
  return report;
}

HighQualitySet select_high_quality(const QualityReport& report, double threshold,
                                   const std::set<LandmarkKind>& exceptions,
                                   const std::set<LandmarkKind>& exclusions) {
  if (!(threshold > 0.0)) throw Error(ErrorKind::InvalidArgument, "quality threshold must be > 0");
  std::set<LandmarkKind> chosen;
  for (const auto& [kind, err] : report.per_kind) {
    if (err.mean_error_px < threshold && !exclusions.contains(kind)) chosen.insert(kind);
  }
  chosen.insert(exceptions.begin(), exceptions.end());
  if (chosen.size() < 3) {
    throw Error(ErrorKind::EmptySelection,
                "only " + std::to_string(chosen.size()) + " landmark kinds selected; angles need at least 3");
  }
  // std::set over the enum already iterates in canonical order.
  return {chosen.begin(), chosen.end()};
}

std::set<LandmarkKind> default_jaw_exceptions() {
  return {Kind::JawUpperRight, Kind::JawMidRight, Kind::ChinBottom};
}

std::set<LandmarkKind> default_exclusions() { return {Kind::RightEyebrowLeft}; }

HighQualitySet default_high_quality_set() {
  return {Kind::LeftEyeCenter, Kind::RightEyeCenter, Kind::MouthLeft,     Kind::MouthRight, Kind::NoseLeft,
          Kind::NoseRight,     Kind::JawUpperRight,  Kind::JawMidRight,   Kind::ChinBottom};
}

HighQualitySet read_high_quality_set(std::istream& in) {
  std::set<LandmarkKind> kinds;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto kind = landmark_from_name(line);
    if (!kind) {
      throw Error(ErrorKind::UnknownLandmarkName,
                  "high-quality set line " + std::to_string(n) + ": unknown landmark \"" + line + "\"");
    }
    kinds.insert(*kind);
  }
  if (kinds.size() < 3) throw Error(ErrorKind::EmptySelection, "high-quality set needs at least 3 landmark kinds");
  return {kinds.begin(), kinds.end()};
}

void write_high_quality_set(std::ostream& out, const HighQualitySet& set) {
  for (auto kind : set) out << landmark_name(kind) << '\n';
}

std::array<double, 3> triplet_angles(Point2 a, Point2 b, Point2 c) {
  constexpr double kCoincident = 1e-12;
  if (norm(b - a) < kCoincident || norm(c - a) < kCoincident || norm(c - b) < kCoincident) {
    throw Error(ErrorKind::DegenerateTriplet, "two triangle vertices coincide");
  }
  return {vertex_angle(b - a, c - a), vertex_angle(a - b, c - b), vertex_angle(a - c, b - c)};
}

AngleFeatureVector angle_features(const LandmarkSet& landmarks, const HighQualitySet& hq) {
  std::vector<Point2> pts;
  pts.reserve(hq.size());
  for (auto kind : hq) {
    const Point2 p = landmarks.at(kind);
    pts.push_back({p.x * landmarks.image_width, p.y * landmarks.image_height});
  }

  AngleFeatureVector out;
  out.face_id = landmarks.face_id();
  out.angles.reserve(angle_feature_count(hq.size()));
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      for (std::size_t k = j + 1; k < n; ++k) {
        try {
          const auto angles = triplet_angles(pts[i], pts[j], pts[k]);
          out.angles.insert(out.angles.end(), angles.begin(), angles.end());
        } catch (const Error&) {
          throw Error(ErrorKind::DegenerateTriplet,
                      "face " + out.face_id + ": degenerate triplet (" + std::string(landmark_name(hq[i])) + ", " +
                          std::string(landmark_name(hq[j])) + ", " + std::string(landmark_name(hq[k])) + ")");
        }
      }
    }
  }
  return out;
}

FeatureBatch extract_features(const std::vector<LandmarkSet>& faces, const HighQualitySet& hq) {
  FeatureBatch batch;
  batch.features.reserve(faces.size());
  for (const auto& face : faces) {
    try {
      batch.features.push_back(angle_features(normalize_left(face), hq));
    } catch (const Error& e) {
      batch.rejected.push_back({face.face_id(), e.what()});
    }
  }
  return batch;
}

void write_feature_csv(std::ostream& out, const std::vector<AngleFeatureVector>& features) {
  const std::size_t count = features.empty() ? 0 : features.front().angles.size();
  const int digits = std::max<int>(3, static_cast<int>(std::to_string(count == 0 ? 0 : count - 1).size()));
  out << "face_id";
  for (std::size_t i = 0; i < count; ++i) {
    const std::string index = std::to_string(i);
    out << ",ang_" << std::string(static_cast<std::size_t>(digits) - std::min<std::size_t>(index.size(), digits), '0')
        << index;
  }
  out << '\n';
  for (const auto& f : features) {
    if (f.angles.size() != count) {
      throw Error(ErrorKind::DimensionMismatch, "face " + f.face_id + " has a different feature count");
    }
    out << csv::escape(f.face_id);
    char buf[64];
    for (double a : f.angles) {
      std::snprintf(buf, sizeof buf, ",%.6f", a);
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace ukiyo
