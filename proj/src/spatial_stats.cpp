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

#include "bfseg/spatial_stats.hpp"

#include <string>

namespace bfseg {

void SpatialThresholds::validate() const {
  if (!(lb >= 0.0) || !std::isfinite(lb)) {
    throw Error(ErrorCode::InvalidParams, "lb must be a finite value >= 0");
  }
  if (!(nav >= 0.0 && nav <= 10.0)) {
    throw Error(ErrorCode::InvalidParams, "nav threshold must lie in [0, 10]");
  }
  if (!(randomness >= -1.0 && randomness <= 1.0)) {
    throw Error(ErrorCode::InvalidParams, "randomness threshold must lie in [-1, 1]");
  }
  if (!valid_patch_size(patch_size)) {
    throw Error(ErrorCode::InvalidParams,
                "patch size must be one of 3, 5, 7, 9, 11 (got " + std::to_string(patch_size) + ")");
  }
}

InverseDistanceWeights::InverseDistanceWeights(Eigen::Index rows, Eigen::Index cols)
    : rows_(rows), cols_(cols), w_(Eigen::MatrixXd::Zero(rows * cols, rows * cols)) {
  const Eigen::Index n = rows * cols;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double dr = static_cast<double>(i / cols - j / cols);
      const double dc = static_cast<double>(i % cols - j % cols);
      const double wij = 1.0 / std::sqrt(dr * dr + dc * dc);
      w_(i, j) = wij;
      w_(j, i) = wij;
    }
  }
  total_ = w_.sum();
}

double calibrate_lb(std::span<const double> samples) {
  if (samples.size() < 2) {
    throw Error(ErrorCode::InsufficientSamples,
                "calibration needs at least 2 background samples, got " + std::to_string(samples.size()));
  }
  const Eigen::Map<const Eigen::ArrayXd> s(samples.data(), static_cast<Eigen::Index>(samples.size()));
  const double mean = s.mean();
  const double sd = std::sqrt((s - mean).square().mean());
  return mean + 3.0 * sd;
}

double calibrate_lb(const std::vector<Patch<double>>& background_patches) {
  std::vector<double> samples;
  samples.reserve(background_patches.size());
  for (const auto& p : background_patches) samples.push_back(ssdlm(p));
  return calibrate_lb(samples);
}

}  // namespace bfseg
