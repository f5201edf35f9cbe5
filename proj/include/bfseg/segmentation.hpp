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

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

#include "bfseg/fuzzy.hpp"
#include "bfseg/image.hpp"
#include "bfseg/spatial_stats.hpp"

namespace bfseg {

/// Which stage decided a pixel.
enum class Provenance : std::uint8_t {
  PrimaryMask,
  FuzzyBlack,
  FuzzyWhite,
  NavMoran,
  ChannelRule,
  NavHighTexture,
};

inline constexpr std::array<Provenance, 6> kAllProvenances{
    Provenance::PrimaryMask, Provenance::FuzzyBlack,  Provenance::FuzzyWhite,
    Provenance::NavMoran,    Provenance::ChannelRule, Provenance::NavHighTexture};

std::string_view to_string(Provenance p);

/// Gray level used for a tag in provenance rasters: 0, 51, 102, 153, 204, 255.
std::uint8_t provenance_level(Provenance p);
std::optional<Provenance> provenance_from_level(std::uint8_t level);

struct PixelVerdict {
  bool foreground = false;
  Provenance provenance = Provenance::PrimaryMask;

  bool operator==(const PixelVerdict&) const = default;
};

struct SegmentationConfig {
  FuzzyParams fuzzy;
  SpatialThresholds thresholds;
  double green_cut = 100.0;
  ClassifyOn classify_on = ClassifyOn::Defuzzified;
  VariogramDistance variogram_distance = VariogramDistance::SequenceIndex;

  void validate() const;
  bool operator==(const SegmentationConfig&) const = default;
};

/// Per-channel neighbourhoods of one pixel.
struct ChannelPatches {
  Patch<double> r, g, b;
};

struct SegmentationResult {
  BinaryMask mask;
  /// Pixels the fuzzy stage left ambiguous.
  BinaryMask uncertainty;
  /// One provenance_level() per pixel.
  Plane8 provenance;
};

struct SegmentOptions {
  int threads = 1;
  int tile_rows = 32;
};

/// 0 where the neighbourhood SSDLM falls strictly below lb, 255 for pixels that
/// stay candidates for the later stages.
BinaryMask primary_mask(const GrayImage& gray, const SegmentationConfig& cfg);

/// Resolves one pixel the fuzzy stage called ambiguous: high normalised
/// variogram means texture (foreground); otherwise low Moran's I means a
/// disordered neighbourhood (background); otherwise the green-channel rule.
PixelVerdict resolve_ambiguous(const ChannelPatches& rgb, const Patch<double>& gray_patch,
                               const SegmentationConfig& cfg, const InverseDistanceWeights& weights);
PixelVerdict resolve_ambiguous(const ChannelPatches& rgb, const Patch<double>& gray_patch,
                               const SegmentationConfig& cfg);

/// Full pipeline on one image. Output is identical for any thread count or
/// tile height.
SegmentationResult segment(const RasterImage& img, const SegmentationConfig& cfg,
                           const SegmentOptions& opts = {});

}  // namespace bfseg
