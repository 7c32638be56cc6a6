// Copyright 2026 The ukiyo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ukiyo/landmarks.hpp"

namespace ukiyo {

/// One artwork of the collection catalogue.
struct MetadataRecord {
  std::string object_id;
  std::string title;
  std::string painter;  // may be empty
  std::string format;
  std::optional<int> year;  // AD, within [1000, 2100] when present

  friend bool operator==(const MetadataRecord&, const MetadataRecord&) = default;
};

inline constexpr int kMinYear = 1000;
inline constexpr int kMaxYear = 2100;

struct ParseWarning {
  std::size_t line = 0;  // 1-based, header counts as line 1 for CSV
  std::string message;
};

enum class MetadataFormat { Csv, Jsonl };

struct MetadataParseResult {
  std::vector<MetadataRecord> records;
  std::vector<ParseWarning> warnings;
};

/// Reads the catalogue. CSV needs a header naming object_id, title, painter,
/// format and year (any order, extra columns ignored); JSONL uses the same
/// field names. A year that is not a plain 4-digit integer in range becomes
/// absent with a warning; malformed rows are skipped with a warning. A
/// repeated object_id throws DuplicateObjectId, invalid UTF-8 throws
/// UnreadableStream.
MetadataParseResult parse_metadata(std::istream& in, MetadataFormat format);

/// Parses a year cell: exactly four ASCII digits (surrounding whitespace
/// allowed) and within [kMinYear, kMaxYear].
std::optional<int> parse_year(std::string_view cell);

struct FaceRecord {
  std::string face_id;
  LandmarkSet landmarks;
  std::optional<MetadataRecord> metadata;

  friend bool operator==(const FaceRecord&, const FaceRecord&) = default;
};

struct JoinResult {
  std::vector<FaceRecord> faces;  // same order and length as the landmark input
  std::vector<std::string> unmatched_metadata;  // object_ids without any face, input order
};

/// Matches landmark sets to metadata by image_id == object_id.
JoinResult join_faces(const std::vector<MetadataRecord>& metadata,
                      const std::vector<LandmarkSet>& landmarks);

/// Counts year-bearing faces in bins [b, b + bin_width) keyed by b; b is a
/// multiple of bin_width. Throws InvalidBinWidth for bin_width < 1.
std::map<int, std::size_t> year_histogram(const std::vector<FaceRecord>& records, int bin_width);

inline constexpr const char* kUnknownPainter = "(unknown)";

struct PainterRow {
  std::string painter;
  std::size_t face_count = 0;
  std::optional<int> min_year;
  std::optional<int> max_year;

  friend bool operator==(const PainterRow&, const PainterRow&) = default;
};

/// Face counts per painter, descending by count then ascending by name.
/// Faces without metadata or with an empty painter share the "(unknown)" row.
std::vector<PainterRow> painter_summary(const std::vector<FaceRecord>& records);

/// Corpus file: JSONL, one face per line, the landmark object extended with
/// "face_id" and an optional "metadata" object.
void write_corpus(std::ostream& out, const std::vector<FaceRecord>& faces);
std::vector<FaceRecord> read_corpus(std::istream& in);

}  // namespace ukiyo
