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
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "bfseg/image.hpp"

namespace bfseg {

struct FillBelowArea {
  long max_area = 100;
  bool operator==(const FillBelowArea&) const = default;
};

struct Erode {
  int kernel = 3;
  bool operator==(const Erode&) const = default;
};

enum class FilterMode { Remove, Keep };

struct CircularityFilter {
  double area_min = 0;
  double area_max = 71;
  double circ_min = 0.0;
  double circ_max = 1.0;
  FilterMode mode = FilterMode::Remove;
  bool operator==(const CircularityFilter&) const = default;
};

struct MedianBlur {
  int kernel = 5;
  bool operator==(const MedianBlur&) const = default;
};

using DenoiseStep = std::variant<FillBelowArea, Erode, CircularityFilter, MedianBlur>;

/// Throws InvalidParams for even or too small kernels and inverted ranges.
void validate(const DenoiseStep& step);

struct DenoiseProfile {
  std::string name;
  double lb = 4.23;
  std::vector<DenoiseStep> steps;

  bool operator==(const DenoiseProfile&) const = default;
};

/// 8-connected foreground component.
struct Component {
  std::vector<Eigen::Index> pixels;  // y * width + x
  Eigen::Index area = 0;
  /// Component pixels with a 4-neighbour outside the component or the image.
  Eigen::Index perimeter = 0;
  /// 4 pi A / P^2, clamped to 1.
  double circularity = 0.0;
};

std::vector<Component> connected_components(const BinaryMask& mask);

/// Fills enclosed background holes (4-connected, not touching the border) with
/// area strictly below max_area.
BinaryMask fill_below_area(const BinaryMask& mask, long max_area);

/// Binary erosion with a kernel x kernel square; borders replicate.
BinaryMask erode(const BinaryMask& mask, int kernel);

BinaryMask circularity_filter(const BinaryMask& mask, const CircularityFilter& step);

/// Majority vote over a kernel x kernel window; borders replicate.
BinaryMask median_blur(const BinaryMask& mask, int kernel);

BinaryMask apply_step(const BinaryMask& mask, const DenoiseStep& step);
BinaryMask apply_profile(const BinaryMask& mask, const DenoiseProfile& profile);

DenoiseProfile profile1();
DenoiseProfile profile2();
/// Dataset-1 variant with the small-object and irregular-blob filters.
DenoiseProfile profile_d1();
/// Accepts "profile1", "Profile-1", "profile2", "profile_d1", "Profile-D1" and similar spellings.
std::optional<DenoiseProfile> builtin_profile(std::string_view name);

/// Profile text format, see docs/profile_format.md.
DenoiseProfile parse_profile(std::string_view text);
std::string format_profile(const DenoiseProfile& profile);
std::string format_step(const DenoiseStep& step);
DenoiseStep parse_step(std::string_view line);
DenoiseProfile load_profile(const std::filesystem::path& path);
void save_profile(const DenoiseProfile& profile, const std::filesystem::path& path);

/// Builtin name or path to a profile file.
DenoiseProfile resolve_profile(std::string_view name_or_path);

}  // namespace bfseg
