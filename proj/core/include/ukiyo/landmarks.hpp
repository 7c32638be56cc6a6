// Copyright 2026 The ukiyo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ukiyo {

/// The 30 facial landmarks of the annotation schema, in canonical order.
/// The numeric value of each enumerator is its canonical index.
enum class LandmarkKind : int {
  LeftEyeCenter,
  LeftEyeLeft,
  LeftEyeRight,
  LeftEyeUp,
  LeftEyeDown,
  RightEyeCenter,
  RightEyeLeft,
  RightEyeRight,
  RightEyeUp,
  RightEyeDown,
  LeftEyebrowLeft,
  LeftEyebrowRight,
  LeftEyebrowUp,
  RightEyebrowLeft,
  RightEyebrowRight,
  RightEyebrowUp,
  LeftPupilCenter,
  RightPupilCenter,
  MouthLeft,
  MouthRight,
  MouthUp,
  MouthDown,
  NoseCenter,
  NoseLeft,
  NoseRight,
  JawUpperLeft,
  JawUpperRight,
  JawMidLeft,
  JawMidRight,
  ChinBottom,
};

inline constexpr std::size_t kLandmarkCount = 30;

constexpr std::size_t index_of(LandmarkKind kind) noexcept {
  return static_cast<std::size_t>(kind);
}

/// All kinds in canonical order.
const std::array<LandmarkKind, kLandmarkCount>& all_landmark_kinds() noexcept;

std::string_view landmark_name(LandmarkKind kind) noexcept;
std::optional<LandmarkKind> landmark_from_name(std::string_view name) noexcept;

/// Label of the same anatomical point after a horizontal reflection of the
/// face. Center-line points (MouthUp, NoseCenter, ChinBottom, ...) map to
/// themselves; mirror(mirror(k)) == k.
LandmarkKind mirror(LandmarkKind kind) noexcept;

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

/// Landmarks of one detected face. Coordinates are normalized to the image
/// ([0,1] on both axes); the pixel dimensions travel with the set.
struct LandmarkSet {
  std::string image_id;
  int face_index = 0;
  int image_width = 0;
  int image_height = 0;
  std::array<std::optional<Point2>, kLandmarkCount> points{};

  bool has(LandmarkKind kind) const noexcept { return points[index_of(kind)].has_value(); }
  const std::optional<Point2>& operator[](LandmarkKind kind) const noexcept {
    return points[index_of(kind)];
  }
  std::optional<Point2>& operator[](LandmarkKind kind) noexcept { return points[index_of(kind)]; }

  /// Throws MissingLandmark naming the face and the kind.
  Point2 at(LandmarkKind kind) const;

  std::size_t present_count() const noexcept;
  bool complete() const noexcept { return present_count() == kLandmarkCount; }

  /// image_id + "#" + face_index
  std::string face_id() const;

  friend bool operator==(const LandmarkSet&, const LandmarkSet&) = default;
};

/// Parses landmark JSONL (one face object per line, blank lines skipped).
/// Validates coordinates into [0,1], rejects unknown landmark names and
/// duplicate (image_id, face_index) pairs. Incomplete sets are accepted;
/// check LandmarkSet::complete().
std::vector<LandmarkSet> import_landmarks(std::istream& in);

/// Serializes one set as a single JSONL line (no trailing newline). Doubles
/// are written in shortest round-trip form so re-import is bit-exact.
std::string serialize_landmarks(const LandmarkSet& set);

void write_landmarks(std::ostream& out, const std::vector<LandmarkSet>& sets);

}  // namespace ukiyo
