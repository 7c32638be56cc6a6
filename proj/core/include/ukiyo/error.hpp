// Copyright 2026 The ukiyo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ukiyo {

enum class ErrorKind {
  // corpus
  DuplicateObjectId,
  UnreadableStream,
  MalformedRecord,
  CoordinateOutOfRange,
  UnknownLandmarkName,
  DuplicateFace,
  InvalidBinWidth,
  // face geometry
  MissingLandmark,
  DegenerateFace,
  DegenerateTriplet,
  EmptyImage,
  NoPairedSamples,
  EmptySelection,
  // embedding
  RankDeficient,
  DimensionMismatch,
  TooFewClasses,
  DegenerateClass,
  PerplexityTooLarge,
  TooFewPoints,
  NonFiniteValue,
  // color separation
  TooFewDistinctColors,
  PaletteSizeMismatch,
  InvalidPalette,
  // shared
  InvalidArgument,
  Io,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a machine-readable kind and a
/// one-line message naming the offending record.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// I/O failures map to a different process exit code than validation ones.
  bool is_io() const noexcept { return kind_ == ErrorKind::Io; }

 private:
  ErrorKind kind_;
};

}  // namespace ukiyo
