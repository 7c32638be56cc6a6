// Copyright 2026 The ukiyo Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "test_support.hpp"
#include "ukiyo/error.hpp"
#include "ukiyo/face_geometry.hpp"

namespace ukiyo {
namespace {

using K = LandmarkKind;

LandmarkSet eyes_nose(double nose_x) {
  LandmarkSet s;
  s.image_id = "f";
  s.image_width = s.image_height = 100;
  s[K::LeftEyeCenter] = Point2{0.4, 0.4};
  s[K::RightEyeCenter] = Point2{0.6, 0.4};
  s[K::NoseCenter] = Point2{nose_x, 0.5};
  return s;
}

LandmarkSet quad_face() {
  LandmarkSet s;
  s.image_id = "q";
  s.image_width = s.image_height = 1000;
  s[K::LeftEyeCenter] = Point2{0.4, 0.4};
  s[K::RightEyeCenter] = Point2{0.6, 0.4};
  s[K::MouthLeft] = Point2{0.45, 0.6};
  s[K::MouthRight] = Point2{0.55, 0.6};
  return s;
}

Point2 rotate_about(Point2 p, Point2 c, double theta) {
  const double dx = p.x - c.x;
  const double dy = p.y - c.y;
  return {c.x + std::cos(theta) * dx - std::sin(theta) * dy, c.y + std::sin(theta) * dx + std::cos(theta) * dy};
}

double dist(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

ErrorKind error_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorKind::Io;
}

TEST(FacingDirection, NoseSideDecides) {
  EXPECT_EQ(facing_direction(eyes_nose(0.6)), Facing::Right);
  EXPECT_EQ(facing_direction(eyes_nose(0.4)), Facing::Left);
  EXPECT_EQ(facing_direction(eyes_nose(0.5)), Facing::Left);
  LandmarkSet missing = eyes_nose(0.5);
  missing[K::NoseCenter].reset();
  EXPECT_EQ(error_of([&] { facing_direction(missing); }), ErrorKind::MissingLandmark);
}

TEST(NormalizeLeft, LeftFacingIsUntouched) {
  const auto s = eyes_nose(0.45);
  EXPECT_EQ(normalize_left(s), s);
}

TEST(NormalizeLeft, RightFacingReflectsAndSwapsLabels) {
  auto s = eyes_nose(0.9);
  s[K::LeftEyeCenter] = Point2{0.3, 0.4};
  s[K::JawUpperLeft] = Point2{0.2, 0.7};
  const auto out = normalize_left(s);
  ASSERT_TRUE(out[K::RightEyeCenter].has_value());
  EXPECT_DOUBLE_EQ(out[K::RightEyeCenter]->x, 0.7);
  EXPECT_DOUBLE_EQ(out[K::RightEyeCenter]->y, 0.4);
  EXPECT_DOUBLE_EQ(out[K::JawUpperRight]->x, 0.8);
  EXPECT_FALSE(out[K::JawUpperLeft].has_value());
  EXPECT_EQ(facing_direction(out), Facing::Left);
}

TEST(NormalizeLeft, IdempotentAndReflectionInvolution) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    const auto s = testing::random_face(rng);
    const auto once = normalize_left(s);
    EXPECT_EQ(normalize_left(once), once);
    EXPECT_EQ(facing_direction(once), Facing::Left);
    const auto twice = reflect(reflect(s));
    for (auto kind : all_landmark_kinds()) {
      EXPECT_NEAR(twice.at(kind).x, s.at(kind).x, 1e-15);
      EXPECT_EQ(twice.at(kind).y, s.at(kind).y);
    }
  }
}

TEST(AlignmentQuad, HandEvaluatedExample) {
  const auto q = alignment_quad(quad_face());
  // e = (0.2, 0), v = (0, 0.2): axis (0.4, 0), centre g + 0.1 v.
  EXPECT_NEAR(q.center().x, 0.5, 1e-12);
  EXPECT_NEAR(q.center().y, 0.42, 1e-12);
  EXPECT_NEAR(q.side_length, 0.8, 1e-12);
  const Point2 expected[4] = {{0.1, 0.02}, {0.1, 0.82}, {0.9, 0.82}, {0.9, 0.02}};
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(q.corners[i].x, expected[i].x, 1e-12) << i;
    EXPECT_NEAR(q.corners[i].y, expected[i].y, 1e-12) << i;
  }
}

TEST(AlignmentQuad, DegenerateFaces) {
  auto s = quad_face();
  s[K::RightEyeCenter] = s[K::LeftEyeCenter];
  EXPECT_EQ(error_of([&] { alignment_quad(s); }), ErrorKind::DegenerateFace);
  s = quad_face();
  s[K::MouthLeft] = Point2{0.5, 0.4};
  s[K::MouthRight] = Point2{0.5, 0.4};
  EXPECT_EQ(error_of([&] { alignment_quad(s); }), ErrorKind::DegenerateFace);
  s = quad_face();
  s[K::MouthRight].reset();
  EXPECT_EQ(error_of([&] { alignment_quad(s); }), ErrorKind::MissingLandmark);
}

TEST(AlignmentQuad, IsSquareAndEquivariant) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  std::uniform_real_distribution<double> shift(-0.2, 0.2);
  for (int i = 0; i < 200; ++i) {
    const auto s = testing::random_face(rng);
    const auto q = alignment_quad(s);
    for (int c = 0; c < 4; ++c) {
      const Point2 a = q.corners[c];
      const Point2 b = q.corners[(c + 1) % 4];
      const Point2 d = q.corners[(c + 2) % 4];
      EXPECT_NEAR(dist(a, b), q.side_length, 1e-9 * q.side_length);
      const double dot = (b.x - a.x) * (d.x - b.x) + (b.y - a.y) * (d.y - b.y);
      EXPECT_NEAR(dot / (q.side_length * q.side_length), 0.0, 1e-9);
    }

    const double theta = angle(rng);
    const Point2 pivot{0.5, 0.5};
    const Point2 t{shift(rng), shift(rng)};
    auto moved = s;
    for (auto& p : moved.points) {
      const auto r = rotate_about(*p, pivot, theta);
      *p = Point2{r.x + t.x, r.y + t.y};
    }
    const auto qm = alignment_quad(moved);
    for (int c = 0; c < 4; ++c) {
      const auto r = rotate_about(q.corners[c], pivot, theta);
      EXPECT_NEAR(qm.corners[c].x, r.x + t.x, 1e-9);
      EXPECT_NEAR(qm.corners[c].y, r.y + t.y, 1e-9);
    }
  }
}

TEST(CropFace, FullImageQuadIsIdentity) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> level(0, 255);
  RgbImage image(16, 16);
  for (std::size_t i = 0; i < image.pixel_count(); ++i) {
    image.set_pixel(i, {level(rng) / 255.0, level(rng) / 255.0, level(rng) / 255.0});
  }
  AlignmentQuad full;
  full.corners = {Point2{0, 0}, Point2{0, 1}, Point2{1, 1}, Point2{1, 0}};
  full.side_length = 1.0;
  const auto crop = crop_face(image, full, 16);
  ASSERT_EQ(crop.width(), 16);
  for (std::size_t i = 0; i < image.pixel_count(); ++i) {
    for (int ch = 0; ch < 3; ++ch) EXPECT_NEAR(crop.pixel(i)[ch], image.pixel(i)[ch], 1e-12);
  }
}

TEST(CropFace, CenterQuadPicksCenterPixels) {
  // 32x32 pattern, quad over the central half, 16x16 output: every output
  // pixel centre lands on an input pixel centre.
  RgbImage image(32, 32);
  for (int y = 0; y < 32; ++y) {
    for (int x = 0; x < 32; ++x) image.set_pixel(x, y, {x / 31.0, y / 31.0, ((x * 7 + y * 3) % 32) / 31.0});
  }
  AlignmentQuad center;
  center.corners = {Point2{0.25, 0.25}, Point2{0.25, 0.75}, Point2{0.75, 0.75}, Point2{0.75, 0.25}};
  center.side_length = 0.5;
  const auto crop = crop_face(image, center, 16);
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < 16; ++x) {
      // Output centre (x+0.5)/16 maps to input sample 8 + x exactly.
      EXPECT_EQ(crop.pixel(x, y), image.pixel(8 + x, 8 + y)) << x << "," << y;
    }
  }
}

TEST(CropFace, ConstantImageGivesConstantCrop) {
  const RgbImage image(40, 30, {0.2, 0.4, 0.6});
  const auto q = alignment_quad(quad_face());
  const auto crop = crop_face(image, q, 64);
  for (std::size_t i = 0; i < crop.pixel_count(); ++i) EXPECT_EQ(crop.pixel(i), (Rgb{0.2, 0.4, 0.6}));
}

TEST(CropFace, RejectsBadArguments) {
  const auto q = alignment_quad(quad_face());
  EXPECT_EQ(error_of([&] { crop_face(RgbImage{}, q, 64); }), ErrorKind::EmptyImage);
  EXPECT_EQ(error_of([&] { crop_face(RgbImage(4, 4), q, 8); }), ErrorKind::InvalidArgument);
}

TEST(QualityReport, IdenticalSetsHaveZeroError) {
  std::mt19937_64 rng(9);
  std::vector<LandmarkSet> faces;
  for (int i = 0; i < 5; ++i) faces.push_back(testing::random_face(rng, "img", i));
  const auto report = quality_report(faces, faces);
  EXPECT_EQ(report.pair_count, 5u);
  EXPECT_EQ(report.per_kind.size(), 30u);
  for (const auto& [kind, e] : report.per_kind) {
    EXPECT_EQ(e.mean_error_px, 0.0);
    EXPECT_EQ(e.samples, 5u);
  }
}

TEST(QualityReport, ThreeFourFive) {
  auto expert = eyes_nose(0.45);
  expert.image_width = 200;
  expert.image_height = 100;
  auto detected = expert;
  detected[K::NoseCenter] = Point2{0.45 + 3.0 / 200.0, 0.5 + 4.0 / 100.0};
  const auto report = quality_report({detected}, {expert});
  EXPECT_NEAR(report.per_kind.at(K::NoseCenter).mean_error_px, 5.0, 1e-9);
  EXPECT_EQ(report.per_kind.at(K::LeftEyeCenter).mean_error_px, 0.0);
  EXPECT_FALSE(report.per_kind.contains(K::ChinBottom));
}

TEST(QualityReport, UnpairedInputFails) {
  auto a = eyes_nose(0.45);
  auto b = a;
  b.image_id = "other";
  EXPECT_EQ(error_of([&] { quality_report({a}, {b}); }), ErrorKind::NoPairedSamples);
}

TEST(QualityReport, CsvRoundTrip) {
  const auto table = reference_quality_table();
  std::ostringstream out;
  write_quality_csv(out, table);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "kind,mean_error_px,n_samples");
  std::istringstream in(out.str());
  const auto back = read_quality_csv(in);
  EXPECT_EQ(back.per_kind, table.per_kind);
}

TEST(SelectHighQuality, EdgeCases) {
  QualityReport report;
  report.per_kind[K::NoseCenter] = {25.0, 1};
  report.per_kind[K::MouthLeft] = {30.0, 1};
  report.per_kind[K::MouthRight] = {40.0, 1};
  EXPECT_EQ(error_of([&] { select_high_quality(report, 20.0, {}, {}); }), ErrorKind::EmptySelection);
  EXPECT_EQ(error_of([&] { select_high_quality(report, 0.0, {}, {}); }), ErrorKind::InvalidArgument);
  const auto all = select_high_quality(report, std::numeric_limits<double>::infinity(), {}, {});
  EXPECT_EQ(all, (HighQualitySet{K::MouthLeft, K::MouthRight, K::NoseCenter}));
}

TEST(SelectHighQuality, MonotoneInThreshold) {
  const auto table = reference_quality_table();
  const auto exceptions = default_jaw_exceptions();
  const auto exclusions = default_exclusions();
  HighQualitySet previous;
  for (double t = 1.0; t <= 80.0; t += 0.5) {
    HighQualitySet current;
    try {
      current = select_high_quality(table, t, exceptions, exclusions);
    } catch (const Error& e) {
      ASSERT_EQ(e.kind(), ErrorKind::EmptySelection);
      continue;
    }
    for (auto k : previous) EXPECT_NE(std::find(current.begin(), current.end(), k), current.end()) << t;
    EXPECT_TRUE(std::is_sorted(current.begin(), current.end()));
    previous = current;
  }
}

TEST(HighQualitySetFile, RoundTripAndValidation) {
  std::ostringstream out;
  write_high_quality_set(out, default_high_quality_set());
  std::istringstream in(out.str());
  EXPECT_EQ(read_high_quality_set(in), default_high_quality_set());
  std::istringstream unsorted("NoseLeft\nLeftEyeCenter\n\nMouthLeft\n");
  EXPECT_EQ(read_high_quality_set(unsorted), (HighQualitySet{K::LeftEyeCenter, K::MouthLeft, K::NoseLeft}));
  std::istringstream bad("LeftEyeCenter\nThirdEye\n");
  EXPECT_THROW(read_high_quality_set(bad), Error);
}

TEST(TripletAngles, KnownTriangles) {
  const auto right = triplet_angles({0, 0}, {1, 0}, {0, 1});
  EXPECT_NEAR(right[0], 90.0, 1e-12);
  EXPECT_NEAR(right[1], 45.0, 1e-12);
  EXPECT_NEAR(right[2], 45.0, 1e-12);
  const auto eq = triplet_angles({0, 0}, {1, 0}, {0.5, std::sqrt(3.0) / 2.0});
  for (double a : eq) EXPECT_NEAR(a, 60.0, 1e-12);
  const auto flat = triplet_angles({0, 0}, {1, 0}, {2, 0});
  EXPECT_NEAR(flat[0], 0.0, 1e-12);
  EXPECT_NEAR(flat[1], 180.0, 1e-12);
  EXPECT_NEAR(flat[2], 0.0, 1e-12);
  EXPECT_EQ(error_of([] { triplet_angles({0, 0}, {0, 0}, {1, 1}); }), ErrorKind::DegenerateTriplet);
}

TEST(AngleFeatures, OrderAndAspect) {
  LandmarkSet s;
  s.image_id = "a";
  s.image_width = 200;
  s.image_height = 100;
  s[K::LeftEyeCenter] = Point2{0.0, 0.0};
  s[K::RightEyeCenter] = Point2{0.5, 0.0};
  s[K::MouthLeft] = Point2{0.0, 1.0};
  // Pixel triangle (0,0), (100,0), (0,100) is right isosceles only because
  // width and height are honoured.
  const HighQualitySet hq{K::LeftEyeCenter, K::RightEyeCenter, K::MouthLeft};
  const auto f = angle_features(s, hq);
  ASSERT_EQ(f.angles.size(), 3u);
  EXPECT_NEAR(f.angles[0], 90.0, 1e-12);
  EXPECT_NEAR(f.angles[1], 45.0, 1e-12);
  EXPECT_NEAR(f.angles[2], 45.0, 1e-12);
  EXPECT_EQ(f.face_id, "a#0");
}

TEST(AngleFeatures, ReportsMissingAndDegenerate) {
  auto s = quad_face();
  EXPECT_EQ(error_of([&] { angle_features(s, default_high_quality_set()); }), ErrorKind::MissingLandmark);
  s[K::NoseLeft] = s[K::MouthLeft];
  try {
    angle_features(s, {K::MouthLeft, K::NoseLeft, K::LeftEyeCenter});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateTriplet);
    EXPECT_NE(std::string(e.what()).find("MouthLeft"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("NoseLeft"), std::string::npos);
  }
}

TEST(ExtractFeatures, RejectsFacesButKeepsOrder) {
  std::mt19937_64 rng(4);
  std::vector<LandmarkSet> faces;
  for (int i = 0; i < 4; ++i) faces.push_back(testing::random_face(rng, "img", i));
  faces[1][K::NoseLeft] = faces[1][K::NoseRight];
  faces[2][K::ChinBottom].reset();
  const auto batch = extract_features(faces, default_high_quality_set());
  ASSERT_EQ(batch.features.size(), 2u);
  EXPECT_EQ(batch.features[0].face_id, "img#0");
  EXPECT_EQ(batch.features[1].face_id, "img#3");
  ASSERT_EQ(batch.rejected.size(), 2u);
  EXPECT_EQ(batch.rejected[0].face_id, "img#1");
  EXPECT_EQ(batch.rejected[1].face_id, "img#2");
}

TEST(FeatureCsv, HeaderAndPrecision) {
  AngleFeatureVector f{"x#0", std::vector<double>(252, 1.0 / 3.0)};
  std::ostringstream out;
  write_feature_csv(out, {f});
  std::istringstream in(out.str());
  std::string header;
  std::string row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header.substr(0, 24), "face_id,ang_000,ang_001,");
  EXPECT_EQ(header.substr(header.size() - 8), ",ang_251");
  EXPECT_EQ(std::count(header.begin(), header.end(), ','), 252);
  EXPECT_EQ(row.substr(0, 14), "x#0,0.333333,0");
}

}  // namespace
}  // namespace ukiyo
