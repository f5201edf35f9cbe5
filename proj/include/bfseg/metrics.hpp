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
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bfseg/image.hpp"

namespace bfseg {

struct ConfusionCounts {
  std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;

  std::int64_t total() const { return tp + fp + tn + fn; }
  bool operator==(const ConfusionCounts&) const = default;
};

/// Foreground is the positive class.
ConfusionCounts confusion(const BinaryMask& pred, const BinaryMask& truth);

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

/// Fields that were not computed hold NaN.
struct MetricReport {
  double iou = kMissing;
  double dice = kMissing;
  double accuracy = kMissing;
  double precision = kMissing;
  double recall = kMissing;
  double f1 = kMissing;
  double ssim = kMissing;
  double hausdorff = kMissing;
};

inline constexpr std::array<std::string_view, 8> kMetricNames{
    "iou", "dice", "accuracy", "precision", "recall", "f1", "ssim", "hausdorff"};

double metric_value(const MetricReport& r, std::size_t index);
double& metric_value(MetricReport& r, std::size_t index);

/// IoU, Dice/F1, accuracy, precision, recall. A ratio with an empty denominator
/// is 1 when both masks are empty and 0 when only one is.
MetricReport pixel_metrics(const ConfusionCounts& c);

/// Mean local SSIM: 11x11 Gaussian window (sigma 1.5), K1 = 0.01, K2 = 0.03,
/// L = 255, averaged over fully-contained windows. Needs both sides >= 11.
double ssim(const GrayImage& a, const GrayImage& b);

enum class HausdorffMode { Foreground, Boundary };

/// Symmetric Hausdorff distance in pixels between foreground point sets (or
/// their 4-connected boundaries). Throws EmptyMask if either set is empty.
double hausdorff(const BinaryMask& a, const BinaryMask& b, HausdorffMode mode = HausdorffMode::Foreground);

/// Cohen's kappa for two raters over the same items.
double cohens_kappa(std::span<const std::string> r1, std::span<const std::string> r2);

struct WilcoxonResult {
  double w_plus = 0;
  double w_minus = 0;
  /// min(W+, W-)
  double statistic = 0;
  double p_value = 1;
  /// Non-zero differences used.
  int n = 0;
  bool exact = true;
};

inline constexpr int kWilcoxonExactLimit = 25;

/// Paired two-sided signed-rank test. Zero differences are dropped and tied
/// magnitudes get mid-ranks. Exact null distribution for n <= 25, normal
/// approximation with tie and continuity correction above.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y);

struct MetricRecord {
  std::string image;
  std::string group;
  MetricReport report;
};

struct MetricSummary {
  double mean = kMissing;
  double sd = kMissing;  // sample SD, 0 for a single value
  std::size_t count = 0;
};

struct GroupReport {
  std::string group;
  std::size_t count = 0;
  std::array<MetricSummary, kMetricNames.size()> metrics;
};

/// Groups in first-appearance order.
std::vector<GroupReport> batch_report(std::span<const MetricRecord> records);

void write_records_csv(std::ostream& out, std::span<const MetricRecord> records);
void write_groups_csv(std::ostream& out, std::span<const GroupReport> groups);
/// Reads rows written by write_records_csv (or any CSV with an "image" column,
/// an optional "group"/"model" column and any subset of the metric columns).
std::vector<MetricRecord> read_records_csv(std::istream& in);

}  // namespace bfseg
