// Copyright 2026 The ukiyo Authors
// SPDX-License-Identifier: Apache-2.0

#include "ukiyo/corpus.hpp"

#include <algorithm>
#include <istream>
#include <iterator>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"
#include "landmark_json.hpp"
#include "ukiyo/csv.hpp"
#include "ukiyo/error.hpp"

namespace ukiyo {
namespace {

constexpr const char* kColumns[] = {"object_id", "title", "painter", "format", "year"};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

void assign_year(MetadataRecord& record, std::string_view cell, std::size_t line,
                 std::vector<ParseWarning>& warnings) {
  record.year = parse_year(cell);
  if (record.year) return;
  if (trim(cell).empty()) {
    warnings.push_back({line, "object " + record.object_id + ": empty year"});
  } else {
    warnings.push_back({line, "object " + record.object_id + ": unparseable year \"" + std::string(cell) + "\""});
  }
}

void register_id(std::unordered_set<std::string>& seen, const MetadataRecord& record, std::size_t line) {
  if (!seen.insert(record.object_id).second) {
    throw Error(ErrorKind::DuplicateObjectId,
                "line " + std::to_string(line) + ": duplicate object_id \"" + record.object_id + "\"");
  }
}

MetadataParseResult parse_csv(const std::string& text) {
  std::istringstream in(text);
  const auto rows = csv::read(in);
  MetadataParseResult result;
  if (rows.empty()) throw Error(ErrorKind::MalformedRecord, "metadata CSV has no header row");

  const auto& header = rows.front();
  std::size_t index[5];
  for (int c = 0; c < 5; ++c) {
    const auto col = csv::column(header, kColumns[c]);
    if (!col) throw Error(ErrorKind::MalformedRecord, std::string("metadata CSV header lacks column ") + kColumns[c]);
    index[c] = *col;
  }
  const std::size_t needed = *std::max_element(std::begin(index), std::end(index)) + 1;

  std::unordered_set<std::string> seen;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.fields.size() < needed) {
      result.warnings.push_back({row.line, "row has " + std::to_string(row.fields.size()) + " fields, expected " +
                                               std::to_string(header.fields.size()) + "; skipped"});
      continue;
    }
    MetadataRecord record;
    record.object_id = std::string(trim(row.fields[index[0]]));
    if (record.object_id.empty()) {
      result.warnings.push_back({row.line, "empty object_id; row skipped"});
      continue;
    }
    record.title = row.fields[index[1]];
    record.painter = std::string(trim(row.fields[index[2]]));
    record.format = row.fields[index[3]];
    assign_year(record, row.fields[index[4]], row.line, result.warnings);
    register_id(seen, record, row.line);
    result.records.push_back(std::move(record));
  }
  return result;
}

MetadataParseResult parse_jsonl(const std::string& text) {
  std::istringstream in(text);
  MetadataParseResult result;
  std::unordered_set<std::string> seen;
  std::string line_text;
  std::size_t line = 0;
  while (std::getline(in, line_text)) {
    ++line;
    if (trim(line_text).empty()) continue;
    nlohmann::json object;
    try {
      object = nlohmann::json::parse(line_text);
    } catch (const nlohmann::json::parse_error&) {
      result.warnings.push_back({line, "not valid JSON; line skipped"});
      continue;
    }
    const auto text_field = [&](const char* name) -> std::optional<std::string> {
      const auto it = object.find(name);
      if (it == object.end() || it->is_null()) return std::string();
      if (!it->is_string()) return std::nullopt;
      return it->get<std::string>();
    };
    if (!object.is_object()) {
      result.warnings.push_back({line, "not a JSON object; line skipped"});
      continue;
    }
    MetadataRecord record;
    const auto id = text_field("object_id");
    const auto title = text_field("title");
    const auto painter = text_field("painter");
    const auto format = text_field("format");
    if (!id || !title || !painter || !format) {
      result.warnings.push_back({line, "non-string text field; line skipped"});
      continue;
    }
    record.object_id = std::string(trim(*id));
    if (record.object_id.empty()) {
      result.warnings.push_back({line, "empty object_id; line skipped"});
      continue;
    }
    record.title = *title;
    record.painter = std::string(trim(*painter));
    record.format = *format;

    const auto year = object.find("year");
    if (year == object.end() || year->is_null()) {
      assign_year(record, "", line, result.warnings);
    } else if (year->is_number_integer()) {
      assign_year(record, std::to_string(year->get<long long>()), line, result.warnings);
    } else if (year->is_string()) {
      assign_year(record, year->get<std::string>(), line, result.warnings);
    } else {
      assign_year(record, year->dump(), line, result.warnings);
    }
    register_id(seen, record, line);
    result.records.push_back(std::move(record));
  }
  return result;
}

}  // namespace

std::optional<int> parse_year(std::string_view cell) {
  const auto t = trim(cell);
  if (t.size() != 4) return std::nullopt;
  int year = 0;
  for (char c : t) {
    if (c < '0' || c > '9') return std::nullopt;
    year = year * 10 + (c - '0');
  }
  if (year < kMinYear || year > kMaxYear) return std::nullopt;
  return year;
}

MetadataParseResult parse_metadata(std::istream& in, MetadataFormat format) {
  if (!in) throw Error(ErrorKind::UnreadableStream, "metadata stream is not readable");
  std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  if (in.bad()) throw Error(ErrorKind::UnreadableStream, "metadata stream read failed");
  if (!is_valid_utf8(text)) throw Error(ErrorKind::UnreadableStream, "metadata stream is not valid UTF-8");
  if (text.starts_with("\xEF\xBB\xBF")) text.erase(0, 3);
  return format == MetadataFormat::Csv ? parse_csv(text) : parse_jsonl(text);
}

JoinResult join_faces(const std::vector<MetadataRecord>& metadata, const std::vector<LandmarkSet>& landmarks) {
  std::unordered_map<std::string, const MetadataRecord*> by_id;
  by_id.reserve(metadata.size());
  for (const auto& record : metadata) by_id.emplace(record.object_id, &record);

  JoinResult result;
  result.faces.reserve(landmarks.size());
  std::unordered_set<std::string> matched;
  for (const auto& set : landmarks) {
    FaceRecord face{set.face_id(), set, std::nullopt};
    if (const auto it = by_id.find(set.image_id); it != by_id.end()) {
      face.metadata = *it->second;
      matched.insert(set.image_id);
    }
    result.faces.push_back(std::move(face));
  }
  for (const auto& record : metadata) {
    if (!matched.contains(record.object_id)) result.unmatched_metadata.push_back(record.object_id);
  }
  return result;
}

std::map<int, std::size_t> year_histogram(const std::vector<FaceRecord>& records, int bin_width) {
  if (bin_width < 1) {
    throw Error(ErrorKind::InvalidBinWidth, "bin width must be >= 1, got " + std::to_string(bin_width));
  }
  std::map<int, std::size_t> bins;
  for (const auto& face : records) {
    if (!face.metadata || !face.metadata->year) continue;
    const int year = *face.metadata->year;
    // floor division so the bin is [b, b + width) for any sign
    int bin = year / bin_width * bin_width;
    if (bin > year) bin -= bin_width;
    ++bins[bin];
  }
  return bins;
}

std::vector<PainterRow> painter_summary(const std::vector<FaceRecord>& records) {
  std::map<std::string, PainterRow> rows;
  for (const auto& face : records) {
    std::string name = face.metadata ? face.metadata->painter : std::string();
    if (name.empty()) name = kUnknownPainter;
    auto& row = rows[name];
    row.painter = name;
    ++row.face_count;
    if (face.metadata && face.metadata->year) {
      const int y = *face.metadata->year;
      row.min_year = row.min_year ? std::min(*row.min_year, y) : y;
      row.max_year = row.max_year ? std::max(*row.max_year, y) : y;
    }
  }
  std::vector<PainterRow> out;
  out.reserve(rows.size());
  for (auto& [name, row] : rows) out.push_back(std::move(row));
  std::stable_sort(out.begin(), out.end(), [](const PainterRow& a, const PainterRow& b) {
    if (a.face_count != b.face_count) return a.face_count > b.face_count;
    return a.painter < b.painter;
  });
  return out;
}

void write_corpus(std::ostream& out, const std::vector<FaceRecord>& faces) {
  for (const auto& face : faces) {
    auto object = detail::landmarks_to_json(face.landmarks);
    object["face_id"] = face.face_id;
    if (face.metadata) {
      const auto& m = *face.metadata;
      object["metadata"] = {{"object_id", m.object_id},
                            {"title", m.title},
                            {"painter", m.painter},
                            {"format", m.format},
                            {"year", m.year ? nlohmann::json(*m.year) : nlohmann::json(nullptr)}};
    }
    out << object.dump() << '\n';
  }
}

std::vector<FaceRecord> read_corpus(std::istream& in) {
  if (!in) throw Error(ErrorKind::UnreadableStream, "corpus stream is not readable");
  std::vector<FaceRecord> faces;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (trim(text).empty()) continue;
    nlohmann::json object;
    try {
      object = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorKind::MalformedRecord, "corpus line " + std::to_string(line) + ": " + e.what());
    }
    FaceRecord face;
    face.landmarks = detail::landmarks_from_json(object, line);
    face.face_id = face.landmarks.face_id();
    if (const auto m = object.find("metadata"); m != object.end() && m->is_object()) {
      try {
        MetadataRecord record;
        record.object_id = m->at("object_id").get<std::string>();
        record.title = m->value("title", "");
        record.painter = m->value("painter", "");
        record.format = m->value("format", "");
        if (const auto y = m->find("year"); y != m->end() && y->is_number_integer()) record.year = y->get<int>();
        face.metadata = std::move(record);
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::MalformedRecord, "corpus line " + std::to_string(line) + ": " + e.what());
      }
    }
    faces.push_back(std::move(face));
  }
  return faces;
}

}  // namespace ukiyo
