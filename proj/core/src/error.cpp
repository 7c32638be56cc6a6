// Copyright 2026 The ukiyo Authors
// SPDX-License-Identifier: Apache-2.0

#include "ukiyo/error.hpp"

namespace ukiyo {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::DuplicateObjectId: return "DuplicateObjectId";
    case ErrorKind::UnreadableStream: return "UnreadableStream";
    case ErrorKind::MalformedRecord: return "MalformedRecord";
    case ErrorKind::CoordinateOutOfRange: return "CoordinateOutOfRange";
    case ErrorKind::UnknownLandmarkName: return "UnknownLandmarkName";
    case ErrorKind::DuplicateFace: return "DuplicateFace";
    case ErrorKind::InvalidBinWidth: return "InvalidBinWidth";
    case ErrorKind::MissingLandmark: return "MissingLandmark";
    case ErrorKind::DegenerateFace: return "DegenerateFace";
    case ErrorKind::DegenerateTriplet: return "DegenerateTriplet";
    case ErrorKind::EmptyImage: return "EmptyImage";
    case ErrorKind::NoPairedSamples: return "NoPairedSamples";
    case ErrorKind::EmptySelection: return "EmptySelection";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::TooFewClasses: return "TooFewClasses";
    case ErrorKind::DegenerateClass: return "DegenerateClass";
    case ErrorKind::PerplexityTooLarge: return "PerplexityTooLarge";
    case ErrorKind::TooFewPoints: return "TooFewPoints";
    case ErrorKind::NonFiniteValue: return "NonFiniteValue";
    case ErrorKind::TooFewDistinctColors: return "TooFewDistinctColors";
    case ErrorKind::PaletteSizeMismatch: return "PaletteSizeMismatch";
    case ErrorKind::InvalidPalette: return "InvalidPalette";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace ukiyo
