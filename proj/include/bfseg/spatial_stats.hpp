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

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <type_traits>
#include <vector>

#include <Eigen/Core>

#include "bfseg/image.hpp"

namespace bfseg {

/// Square odd-sided neighbourhood of intensities.
template <typename Scalar>
using Patch = Plane<Scalar>;

inline bool valid_patch_size(int n) { return n >= 3 && n <= 11 && n % 2 == 1; }

/// Default homogeneity lower bound for bright-field images.
inline constexpr double kBrightFieldLb = 4.23;

struct SpatialThresholds {
  double lb = kBrightFieldLb;
  double nav = 5.0;         // [0, 10]
  double randomness = 0.0;  // [-1, 1]
  int patch_size = 5;

  /// Throws InvalidParams when a field is out of range.
  void validate() const;
  bool operator==(const SpatialThresholds&) const = default;
};

/// Distance used by the adjusted variogram. SequenceIndex measures |i - j| in the
/// row-major flattened patch; Euclidean2D uses pixel coordinates.
enum class VariogramDistance { SequenceIndex, Euclidean2D };

namespace detail {

template <typename Derived>
using ScalarOf = typename Derived::Scalar;

template <typename Derived>
constexpr void require_floating() {
  static_assert(std::is_floating_point_v<ScalarOf<Derived>>,
                "spatial statistics operate on floating-point patches; cast first");
}

template <typename Derived>
Eigen::Matrix<ScalarOf<Derived>, Eigen::Dynamic, 1> flatten(const Eigen::MatrixBase<Derived>& patch) {
  Eigen::Matrix<ScalarOf<Derived>, Eigen::Dynamic, 1> z(patch.size());
  Eigen::Index k = 0;
  for (Eigen::Index r = 0; r < patch.rows(); ++r)
    for (Eigen::Index c = 0; c < patch.cols(); ++c) z(k++) = patch(r, c);
  return z;
}

template <typename Derived>
bool is_constant(const Eigen::MatrixBase<Derived>& patch) {
  return patch.size() == 0 || patch.maxCoeff() == patch.minCoeff();
}

}  // namespace detail

/// Population standard deviation of the patch (divides by the pixel count).
template <typename Derived>
detail::ScalarOf<Derived> ssdlm(const Eigen::MatrixBase<Derived>& patch) {
  detail::require_floating<Derived>();
  const auto mean = patch.mean();
  return std::sqrt((patch.array() - mean).square().mean());
}

/// Half the sum of squared differences over every pixel and its in-bounds
/// 8-neighbours, i.e. the plain sum over unordered adjacent pairs.
template <typename Derived>
detail::ScalarOf<Derived> cssni(const Eigen::MatrixBase<Derived>& patch) {
  detail::require_floating<Derived>();
  using S = detail::ScalarOf<Derived>;
  const Eigen::Index r = patch.rows();
  const Eigen::Index c = patch.cols();
  S sum = 0;
  if (c > 1) sum += (patch.rightCols(c - 1) - patch.leftCols(c - 1)).squaredNorm();
  if (r > 1) sum += (patch.bottomRows(r - 1) - patch.topRows(r - 1)).squaredNorm();
  if (r > 1 && c > 1) {
    sum += (patch.bottomRightCorner(r - 1, c - 1) - patch.topLeftCorner(r - 1, c - 1)).squaredNorm();
    sum += (patch.bottomLeftCorner(r - 1, c - 1) - patch.topRightCorner(r - 1, c - 1)).squaredNorm();
  }
  return sum;
}

/// gamma = 1/2 * mean over unordered pairs (i < j) of (z_i - z_j)^2 / d(i, j).
template <typename Derived>
detail::ScalarOf<Derived> adjusted_variogram(const Eigen::MatrixBase<Derived>& patch,
                                             VariogramDistance distance = VariogramDistance::SequenceIndex) {
  detail::require_floating<Derived>();
  using S = detail::ScalarOf<Derived>;
  const Eigen::Index n = patch.size();
  if (n < 2) return S(0);
  const auto z = detail::flatten(patch);
  S total = 0;
  if (distance == VariogramDistance::SequenceIndex) {
    for (Eigen::Index lag = 1; lag < n; ++lag) {
      total += (z.tail(n - lag) - z.head(n - lag)).squaredNorm() / static_cast<S>(lag);
    }
  } else {
    const Eigen::Index cols = patch.cols();
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const S dr = static_cast<S>(i / cols - j / cols);
        const S dc = static_cast<S>(i % cols - j % cols);
        const S diff = z(i) - z(j);
        total += diff * diff / std::sqrt(dr * dr + dc * dc);
      }
    }
  }
  const S pairs = static_cast<S>(n) * static_cast<S>(n - 1) / 2;
  return S(0.5) * total / pairs;
}

/// Adjusted variogram divided by SSDLM; empty for a zero-variance patch.
template <typename Derived>
std::optional<detail::ScalarOf<Derived>> nav_normalized(
    const Eigen::MatrixBase<Derived>& patch,
    VariogramDistance distance = VariogramDistance::SequenceIndex) {
  if (detail::is_constant(patch)) return std::nullopt;
  return adjusted_variogram(patch, distance) / ssdlm(patch);
}

/// Inverse-Euclidean-distance weights between all pixels of a rows x cols patch,
/// indexed by row-major position; zero on the diagonal.
class InverseDistanceWeights {
 public:
  InverseDistanceWeights(Eigen::Index rows, Eigen::Index cols);

  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }
  const Eigen::MatrixXd& matrix() const { return w_; }
  double total() const { return total_; }

 private:
  Eigen::Index rows_;
  Eigen::Index cols_;
  Eigen::MatrixXd w_;
  double total_;
};

/// Moran's I over all pixel pairs of the patch; empty for a zero-variance patch.
template <typename Derived>
std::optional<double> morans_i(const Eigen::MatrixBase<Derived>& patch, const InverseDistanceWeights& w) {
  detail::require_floating<Derived>();
  if (patch.rows() != w.rows() || patch.cols() != w.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "morans_i: weight scheme built for a different patch size");
  }
  if (detail::is_constant(patch)) return std::nullopt;
  Eigen::VectorXd z = detail::flatten(patch).template cast<double>();
  z.array() -= z.mean();
  const double n = static_cast<double>(z.size());
  return n * z.dot(w.matrix() * z) / (w.total() * z.squaredNorm());
}

template <typename Derived>
std::optional<double> morans_i(const Eigen::MatrixBase<Derived>& patch) {
  return morans_i(patch, InverseDistanceWeights(patch.rows(), patch.cols()));
}

/// Fills `out` with the n x n patch centred on (x, y); out-of-image coordinates
/// clamp to the border.
template <typename Scalar, typename PlaneT>
void extract_patch_into(const PlaneT& image, Eigen::Index x, Eigen::Index y, int n, Patch<Scalar>& out) {
  const Eigen::Index half = n / 2;
  const Eigen::Index w = image.cols();
  const Eigen::Index h = image.rows();
  out.resize(n, n);
  if (x - half >= 0 && y - half >= 0 && x + half < w && y + half < h) {
    out = image.block(y - half, x - half, n, n).template cast<Scalar>();
    return;
  }
  for (Eigen::Index r = 0; r < n; ++r) {
    const Eigen::Index yy = std::clamp<Eigen::Index>(y - half + r, 0, h - 1);
    for (Eigen::Index c = 0; c < n; ++c) {
      const Eigen::Index xx = std::clamp<Eigen::Index>(x - half + c, 0, w - 1);
      out(r, c) = static_cast<Scalar>(image(yy, xx));
    }
  }
}

template <typename Scalar, typename PlaneT>
Patch<Scalar> extract_patch(const PlaneT& image, Eigen::Index x, Eigen::Index y, int n) {
  Patch<Scalar> p;
  extract_patch_into(image, x, y, n, p);
  return p;
}

/// mean + 3 * population SD of background SSDLM samples. Needs at least two.
double calibrate_lb(std::span<const double> ssdlm_samples);
double calibrate_lb(const std::vector<Patch<double>>& background_patches);

}  // namespace bfseg
