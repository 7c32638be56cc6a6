// Copyright 2026 The ukiyo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>

#include "json.hpp"
#include "ukiyo/landmarks.hpp"

namespace ukiyo::detail {

nlohmann::json landmarks_to_json(const LandmarkSet& set);

// `line` is 1-based and only used in error messages.
LandmarkSet landmarks_from_json(const nlohmann::json& object, std::size_t line);

}  // namespace ukiyo::detail
