// Copyright 2026 The ukiyo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ukiyo::csv {

struct Row {
  std::size_t line = 0;  // 1-based line where the row starts
  std::vector<std::string> fields;
};

/// RFC 4180 reader: quoted fields may contain commas, doubled quotes and
/// newlines. CRLF line endings are accepted. Blank lines are skipped.
/// Throws Error(MalformedRecord) on an unterminated quote.
std::vector<Row> read(std::istream& in);

/// Quotes a field only when it contains a comma, quote, CR or LF.
std::string escape(std::string_view field);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

/// Column index of `name` in a header row, if present.
std::optional<std::size_t> column(const Row& header, std::string_view name);

}  // namespace ukiyo::csv

namespace ukiyo {

/// True iff `text` is well-formed UTF-8 (no overlongs, no surrogates).
bool is_valid_utf8(std::string_view text) noexcept;

}  // namespace ukiyo
