// Copyright 2026 The ukiyo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ukiyo/image.hpp"
#include "ukiyo/landmarks.hpp"

namespace ukiyo {

enum class Facing { Left, Right };

/// Right iff NoseCenter lies right of the eye-center midpoint; ties face Left.
Facing facing_direction(const LandmarkSet& landmarks);

/// Horizontal reflection x -> 1 - x with every lateral label swapped for its
/// mirror partner. Applying it twice restores the input.
LandmarkSet reflect(const LandmarkSet& landmarks);

/// Reflects right-facing sets; left-facing sets are returned unchanged.
LandmarkSet normalize_left(const LandmarkSet& landmarks);

/// Rotated square face frame (FFHQ-style). Corners are in normalized image
/// coordinates in the order top-left, bottom-left, bottom-right, top-right.
struct AlignmentQuad {
  std::array<Point2, 4> corners{};
  double side_length = 0.0;

  Point2 center() const noexcept;
};

/// Frame from eye centers and mouth corners:
///   e = right_eye - left_eye, v = mouth_mid - eye_mid,
///   x = normalize(e - rot90(v)) * max(2|e|, 1.8|v|), y = rot90(x),
///   c = eye_mid + 0.1 v, corners = c -+ x -+ y,
/// with rot90(p) = (-p.y, p.x). Throws DegenerateFace when |e| or |v| is 0.
AlignmentQuad alignment_quad(const LandmarkSet& landmarks);

/// Samples the quad onto an out_size x out_size square by bilinearly mapping
/// output pixel centers into the quad and bilinearly interpolating the
/// source with edge clamping. Requires out_size >= kMinCropSize.
inline constexpr int kMinCropSize = 16;
RgbImage crop_face(const RgbImage& image, const AlignmentQuad& quad, int out_size);

struct KindError {
  double mean_error_px = 0.0;
  std::size_t samples = 0;

  friend bool operator==(const KindError&, const KindError&) = default;
};

/// Mean detected-vs-expert pixel distance per landmark kind. Kinds that no
/// pair has in common are absent.
struct QualityReport {
  std::map<LandmarkKind, KindError> per_kind;
  std::size_t pair_count = 0;
};

/// Pairs sets by (image_id, face_index); both members of a pair are reflected
/// together when the expert annotation faces right, so labels stay aligned.
/// Distances use the expert set's pixel dimensions. Throws NoPairedSamples.
QualityReport quality_report(const std::vector<LandmarkSet>& detected, const std::vector<LandmarkSet>& expert);

void write_quality_csv(std::ostream& out, const QualityReport& report);
QualityReport read_quality_csv(std::istream& in);

/// The mean-error table measured on 69 expert-annotated paintings; kinds the
/// study did not cover are absent.
QualityReport reference_quality_table();

using HighQualitySet = std::vector<LandmarkKind>;  // canonical order, no duplicates

/// Kinds with mean error < threshold, minus `exclusions`, plus `exceptions`,
/// in canonical order. Throws EmptySelection if fewer than 3 kinds remain and
/// InvalidArgument if threshold <= 0.
HighQualitySet select_high_quality(const QualityReport& report, double threshold,
                                   const std::set<LandmarkKind>& exceptions,
                                   const std::set<LandmarkKind>& exclusions);

/// Jawline points that stay visible on left-facing faces.
std::set<LandmarkKind> default_jaw_exceptions();
/// The lone sub-threshold eyebrow point.
std::set<LandmarkKind> default_exclusions();

/// LeftEyeCenter, RightEyeCenter, MouthLeft, MouthRight, NoseLeft, NoseRight,
/// JawUpperRight, JawMidRight, ChinBottom: 3 * C(9,3) = 252 angles.
HighQualitySet default_high_quality_set();

/// One kind name per line; blank lines and '#' comments skipped.
HighQualitySet read_high_quality_set(std::istream& in);
void write_high_quality_set(std::ostream& out, const HighQualitySet& set);

/// Interior angles (degrees) at a, b and c. Throws DegenerateTriplet when two
/// points are closer than 1e-12.
std::array<double, 3> triplet_angles(Point2 a, Point2 b, Point2 c);

/// Number of features for `kinds` landmarks: 3 * C(kinds, 3).
constexpr std::size_t angle_feature_count(std::size_t kinds) noexcept {
  return kinds < 3 ? 0 : kinds * (kinds - 1) * (kinds - 2) / 2;
}

struct AngleFeatureVector {
  std::string face_id;
  std::vector<double> angles;  // degrees
};

/// Angles of every triplet i < j < k of `hq` (lexicographic), each triplet
/// contributing the angles at i, j and k. Points are scaled to pixels
/// (x * width, y * height) before measuring. The input must already face
/// left (see normalize_left). Throws MissingLandmark or DegenerateTriplet.
AngleFeatureVector angle_features(const LandmarkSet& landmarks, const HighQualitySet& hq);

struct RejectedFace {
  std::string face_id;
  std::string reason;
};

struct FeatureBatch {
  std::vector<AngleFeatureVector> features;  // input order, rejected faces skipped
  std::vector<RejectedFace> rejected;
};

/// normalize_left + angle_features for every set; faces that fail are
/// reported instead of aborting the batch.
FeatureBatch extract_features(const std::vector<LandmarkSet>& faces, const HighQualitySet& hq);

/// Header face_id,ang_000,...; angles printed with 6 decimals.
void write_feature_csv(std::ostream& out, const std::vector<AngleFeatureVector>& features);

}  // namespace ukiyo
