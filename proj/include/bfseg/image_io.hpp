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
#include <filesystem>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "bfseg/image.hpp"

namespace bfseg {

using Bytes = std::vector<std::uint8_t>;

/// Decodes an 8-bit PNG, TIFF or BMP. Gray and gray+alpha sources are replicated
/// across the three channels; alpha is dropped.
RasterImage load_image(const std::filesystem::path& path);
RasterImage decode_image(std::span<const std::uint8_t> bytes);

/// floor((R + G + B) / 3) per pixel.
GrayImage to_gray_average(const RasterImage& img);

std::tuple<GrayImage, GrayImage, GrayImage> split_channels(const RasterImage& img);
RasterImage merge_channels(const GrayImage& r, const GrayImage& g, const GrayImage& b);

/// Masks are stored as 8-bit single-channel PNG, 0 / 255.
void save_mask(const BinaryMask& mask, const std::filesystem::path& path);
BinaryMask load_mask(const std::filesystem::path& path);

Bytes encode_png(const Plane8& gray);
Bytes encode_png(const RasterImage& rgb);
void write_bytes(const Bytes& bytes, const std::filesystem::path& path);

inline constexpr std::array<std::uint8_t, 3> kDetected{255, 255, 255};
inline constexpr std::array<std::uint8_t, 3> kMissed{0, 255, 0};
inline constexpr std::array<std::uint8_t, 3> kFalsePositive{200, 200, 200};
inline constexpr std::array<std::uint8_t, 3> kTrueNegative{0, 0, 0};
inline constexpr std::array<std::uint8_t, 3> kUncertain{255, 0, 255};

/// Four-colour legend: detected TP white, missed TP green, FP off-white, TN black.
OverlayImage render_comparison(const BinaryMask& pred, const BinaryMask& truth);

/// Gray replicated to RGB with uncertain pixels painted pink.
OverlayImage render_uncertainty(const GrayImage& gray, const BinaryMask& uncertain);

}  // namespace bfseg
