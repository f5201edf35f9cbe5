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

#include <cstdint>

#include <Eigen/Core>

#include "bfseg/error.hpp"

namespace bfseg {

/// Row-major dense plane; rows index y, columns index x.
template <typename Scalar>
using Plane = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Plane8 = Plane<std::uint8_t>;
using PlaneD = Plane<double>;

inline constexpr std::uint8_t kBackground = 0;
inline constexpr std::uint8_t kForeground = 255;

/// 8-bit single-channel intensity image.
struct GrayImage {
  Plane8 pixels;

  GrayImage() = default;
  explicit GrayImage(Plane8 p) : pixels(std::move(p)) {}
  GrayImage(Eigen::Index width, Eigen::Index height, std::uint8_t fill = 0)
      : pixels(Plane8::Constant(height, width, fill)) {}

  Eigen::Index width() const { return pixels.cols(); }
  Eigen::Index height() const { return pixels.rows(); }
  std::uint8_t operator()(Eigen::Index x, Eigen::Index y) const { return pixels(y, x); }
  std::uint8_t& operator()(Eigen::Index x, Eigen::Index y) { return pixels(y, x); }
  bool operator==(const GrayImage& o) const {
    return pixels.rows() == o.pixels.rows() && pixels.cols() == o.pixels.cols() &&
           pixels == o.pixels;
  }
};

/// Two-level mask: 0 = background, 255 = foreground.
struct BinaryMask {
  Plane8 pixels;

  BinaryMask() = default;
  explicit BinaryMask(Plane8 p);
  BinaryMask(Eigen::Index width, Eigen::Index height, bool foreground = false)
      : pixels(Plane8::Constant(height, width, foreground ? kForeground : kBackground)) {}

  Eigen::Index width() const { return pixels.cols(); }
  Eigen::Index height() const { return pixels.rows(); }
  bool at(Eigen::Index x, Eigen::Index y) const { return pixels(y, x) != kBackground; }
  void set(Eigen::Index x, Eigen::Index y, bool fg) { pixels(y, x) = fg ? kForeground : kBackground; }
  Eigen::Index count() const { return (pixels.array() != kBackground).count(); }
  bool empty() const { return count() == 0; }
  bool operator==(const BinaryMask& o) const {
    return pixels.rows() == o.pixels.rows() && pixels.cols() == o.pixels.cols() &&
           pixels == o.pixels;
  }
};

/// Three 8-bit channel planes. Grayscale sources are replicated into all three.
struct RasterImage {
  Plane8 r, g, b;

  RasterImage() = default;
  RasterImage(Eigen::Index width, Eigen::Index height)
      : r(Plane8::Zero(height, width)), g(Plane8::Zero(height, width)), b(Plane8::Zero(height, width)) {}
  RasterImage(Plane8 red, Plane8 green, Plane8 blue);

  Eigen::Index width() const { return r.cols(); }
  Eigen::Index height() const { return r.rows(); }
  void set(Eigen::Index x, Eigen::Index y, std::uint8_t rv, std::uint8_t gv, std::uint8_t bv) {
    r(y, x) = rv;
    g(y, x) = gv;
    b(y, x) = bv;
  }
  bool operator==(const RasterImage& o) const {
    return width() == o.width() && height() == o.height() && r == o.r && g == o.g && b == o.b;
  }
};

/// Rendered visualisation; same storage as a raster.
using OverlayImage = RasterImage;

template <typename A, typename B>
void require_same_size(const A& a, const B& b, const char* what) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw Error(ErrorCode::DimensionMismatch, what);
  }
}

}  // namespace bfseg
