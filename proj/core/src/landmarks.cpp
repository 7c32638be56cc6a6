// Copyright 2026 The ukiyo Authors
// SPDX-License-Identifier: Apache-2.0

#include "ukiyo/landmarks.hpp"

#include <istream>
#include <ostream>
#include <set>
#include <utility>

#include "landmark_json.hpp"
#include "ukiyo/error.hpp"

namespace ukiyo {
namespace {

using Kind = LandmarkKind;

constexpr std::array<std::string_view, kLandmarkCount> kNames = {
    "LeftEyeCenter",     "LeftEyeLeft",      "LeftEyeRight",    "LeftEyeUp",
    "LeftEyeDown",       "RightEyeCenter",   "RightEyeLeft",    "RightEyeRight",
    "RightEyeUp",        "RightEyeDown",     "LeftEyebrowLeft", "LeftEyebrowRight",
    "LeftEyebrowUp",     "RightEyebrowLeft", "RightEyebrowRight", "RightEyebrowUp",
    "LeftPupilCenter",   "RightPupilCenter", "MouthLeft",       "MouthRight",
    "MouthUp",           "MouthDown",        "NoseCenter",      "NoseLeft",
    "NoseRight",         "JawUpperLeft",     "JawUpperRight",   "JawMidLeft",
    "JawMidRight",       "ChinBottom",
};

constexpr std::array<std::pair<Kind, Kind>, 12> kMirrorPairs = {{
    {Kind::LeftEyeCenter, Kind::RightEyeCenter},
    // A reflected left eye's outer (left) corner becomes the right eye's
    // outer (right) corner.
    {Kind::LeftEyeLeft, Kind::RightEyeRight},
    {Kind::LeftEyeRight, Kind::RightEyeLeft},
    {Kind::LeftEyeUp, Kind::RightEyeUp},
    {Kind::LeftEyeDown, Kind::RightEyeDown},
    {Kind::LeftEyebrowLeft, Kind::RightEyebrowRight},
    {Kind::LeftEyebrowRight, Kind::RightEyebrowLeft},
    {Kind::LeftEyebrowUp, Kind::RightEyebrowUp},
    {Kind::LeftPupilCenter, Kind::RightPupilCenter},
    {Kind::MouthLeft, Kind::MouthRight},
    {Kind::NoseLeft, Kind::NoseRight},
    {Kind::JawUpperLeft, Kind::JawUpperRight},
}};

std::array<Kind, kLandmarkCount> build_mirror_table() {
  std::array<Kind, kLandmarkCount> table{};
  for (std::size_t i = 0; i < kLandmarkCount; ++i) table[i] = static_cast<Kind>(i);
  for (auto [a, b] : kMirrorPairs) {
    table[index_of(a)] = b;
    table[index_of(b)] = a;
  }
  table[index_of(Kind::JawMidLeft)] = Kind::JawMidRight;
  table[index_of(Kind::JawMidRight)] = Kind::JawMidLeft;
  return table;
}

}  // namespace

const std::array<LandmarkKind, kLandmarkCount>& all_landmark_kinds() noexcept {
  static const auto kinds = [] {
    std::array<LandmarkKind, kLandmarkCount> out{};
    for (std::size_t i = 0; i < kLandmarkCount; ++i) out[i] = static_cast<LandmarkKind>(i);
    return out;
  }();
  return kinds;
}

std::string_view landmark_name(LandmarkKind kind) noexcept { return kNames[index_of(kind)]; }

std::optional<LandmarkKind> landmark_from_name(std::string_view name) noexcept {
  for (std::size_t i = 0; i < kLandmarkCount; ++i) {
    if (kNames[i] == name) return static_cast<LandmarkKind>(i);
  }
  return std::nullopt;
}

LandmarkKind mirror(LandmarkKind kind) noexcept {
  static const auto table = build_mirror_table();
  return table[index_of(kind)];
}

Point2 LandmarkSet::at(LandmarkKind kind) const {
  const auto& p = points[index_of(kind)];
  if (!p) {
    throw Error(ErrorKind::MissingLandmark,
                "face " + face_id() + " lacks landmark " + std::string(landmark_name(kind)));
  }
  return *p;
}

std::size_t LandmarkSet::present_count() const noexcept {
  std::size_t n = 0;
  for (const auto& p : points) n += p.has_value() ? 1 : 0;
  return n;
}

std::string LandmarkSet::face_id() const { return image_id + "#" + std::to_string(face_index); }

namespace detail {

nlohmann::json landmarks_to_json(const LandmarkSet& set) {
  nlohmann::json marks = nlohmann::json::object();
  for (auto kind : all_landmark_kinds()) {
    if (const auto& p = set[kind]) {
      marks[std::string(landmark_name(kind))] = {{"x", p->x}, {"y", p->y}};
    }
  }
  return {{"image_id", set.image_id},
          {"face_index", set.face_index},
          {"image_width", set.image_width},
          {"image_height", set.image_height},
          {"landmarks", std::move(marks)}};
}

LandmarkSet landmarks_from_json(const nlohmann::json& object, std::size_t line) {
  const auto where = [line] { return "line " + std::to_string(line) + ": "; };
  if (!object.is_object()) throw Error(ErrorKind::MalformedRecord, where() + "expected a JSON object");

  LandmarkSet set;
  try {
    set.image_id = object.at("image_id").get<std::string>();
    set.face_index = object.at("face_index").get<int>();
    set.image_width = object.at("image_width").get<int>();
    set.image_height = object.at("image_height").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::MalformedRecord, where() + e.what());
  }
  if (set.image_id.empty()) throw Error(ErrorKind::MalformedRecord, where() + "empty image_id");
  if (set.face_index < 0) throw Error(ErrorKind::MalformedRecord, where() + "negative face_index");
  if (set.image_width <= 0 || set.image_height <= 0) {
    throw Error(ErrorKind::MalformedRecord, where() + "image dimensions must be positive");
  }

  const auto marks = object.find("landmarks");
  if (marks == object.end() || !marks->is_object()) {
    throw Error(ErrorKind::MalformedRecord, where() + "missing \"landmarks\" object");
  }
  for (const auto& [name, value] : marks->items()) {
    const auto kind = landmark_from_name(name);
    if (!kind) throw Error(ErrorKind::UnknownLandmarkName, where() + "unknown landmark name \"" + name + "\"");
    Point2 p;
    try {
      p.x = value.at("x").get<double>();
      p.y = value.at("y").get<double>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::MalformedRecord, where() + name + ": " + e.what());
    }
    if (!(p.x >= 0.0 && p.x <= 1.0 && p.y >= 0.0 && p.y <= 1.0)) {
      throw Error(ErrorKind::CoordinateOutOfRange,
                  where() + name + " = (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                      ") lies outside [0,1]^2");
    }
    set[*kind] = p;
  }
  return set;
}

}  // namespace detail

std::vector<LandmarkSet> import_landmarks(std::istream& in) {
  if (!in) throw Error(ErrorKind::UnreadableStream, "landmark stream is not readable");
  std::vector<LandmarkSet> sets;
  std::set<std::pair<std::string, int>> seen;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json object;
    try {
      object = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorKind::MalformedRecord, "line " + std::to_string(line) + ": " + e.what());
    }
    auto set = detail::landmarks_from_json(object, line);
    if (!seen.emplace(set.image_id, set.face_index).second) {
      throw Error(ErrorKind::DuplicateFace,
                  "line " + std::to_string(line) + ": duplicate face " + set.face_id());
    }
    sets.push_back(std::move(set));
  }
  if (in.bad()) throw Error(ErrorKind::UnreadableStream, "landmark stream read failed");
  return sets;
}

std::string serialize_landmarks(const LandmarkSet& set) { return detail::landmarks_to_json(set).dump(); }

void write_landmarks(std::ostream& out, const std::vector<LandmarkSet>& sets) {
  for (const auto& set : sets) out << serialize_landmarks(set) << '\n';
}

}  // namespace ukiyo
