/*
   Copyright 2026 The bfseg Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "bfseg/denoise.hpp"
#include "bfseg/segmentation.hpp"

namespace bfseg {

/// Everything needed to reproduce one mask: the segmentation config and the
/// denoise profile applied to its output.
struct RunConfig {
  SegmentationConfig segmentation;
  DenoiseProfile profile = profile1();

  bool operator==(const RunConfig&) const = default;
};

/// Current slider positions implied by a parameter set.
double shift_gray(const FuzzyParams& p);
double span_gray(const FuzzyParams& p);

/// Reads a number given either as a JSON number or a decimal string and checks
/// it against [lo, hi]. Throws InvalidParams naming `key` otherwise.
double parse_decimal(const nlohmann::json& value, const std::string& key, double lo, double hi);

/// Applies the parameter keys present in `body` on top of `cfg`:
///   shift_gray, span_gray, lb, nav, randomness, green_cut, patch_size,
///   classify_on, variogram_distance, and a "fuzzy" object with raw
///   breakpoints. Unknown keys are rejected. Returns the new config; `cfg` is
///   untouched when validation fails.
SegmentationConfig apply_param_updates(const SegmentationConfig& cfg, const nlohmann::json& body);

nlohmann::json to_json(const SegmentationConfig& cfg);
nlohmann::json to_json(const DenoiseStep& step);
nlohmann::json to_json(const DenoiseProfile& profile);
DenoiseStep step_from_json(const nlohmann::json& j);

/// Replaces the step list from {"preset": name} or {"steps": [...]}. An empty
/// step list is allowed and leaves masks unchanged.
DenoiseProfile profile_from_json(const nlohmann::json& j, const DenoiseProfile& current);

/// Run config file: JSON with an optional "profile" (builtin name or path,
/// resolved relative to the file), whose lb seeds the thresholds, followed by
/// the same keys apply_param_updates accepts.
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig run_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

/// 16 hex digits identifying a configuration.
std::string config_hash(const SegmentationConfig& cfg);
std::string config_hash(const SegmentationConfig& cfg, const DenoiseProfile& profile);

}  // namespace bfseg
