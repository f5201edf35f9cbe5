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

#include "bfseg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "bfseg/csv.hpp"

namespace bfseg {

double metric_value(const MetricReport& r, std::size_t index) {
  return metric_value(const_cast<MetricReport&>(r), index);
}

double& metric_value(MetricReport& r, std::size_t index) {
  switch (index) {
    case 0: return r.iou;
    case 1: return r.dice;
    case 2: return r.accuracy;
    case 3: return r.precision;
    case 4: return r.recall;
    case 5: return r.f1;
    case 6: return r.ssim;
    case 7: return r.hausdorff;
  }
  throw std::out_of_range("metric index");
}

ConfusionCounts confusion(const BinaryMask& pred, const BinaryMask& truth) {
  require_same_size(pred, truth, "confusion: prediction and truth differ in size");
  const auto p = pred.pixels.array() != kBackground;
  const auto t = truth.pixels.array() != kBackground;
  ConfusionCounts c;
  c.tp = (p && t).count();
  c.fp = (p && !t).count();
  c.fn = (!p && t).count();
  c.tn = (!p && !t).count();
  return c;
}

namespace {

/// num / den with the both-empty / one-empty convention.
double ratio(double num, double den, bool both_empty) {
  if (den > 0) return num / den;
  return both_empty ? 1.0 : 0.0;
}

}  // namespace

MetricReport pixel_metrics(const ConfusionCounts& c) {
  const double tp = static_cast<double>(c.tp);
  const double fp = static_cast<double>(c.fp);
  const double fn = static_cast<double>(c.fn);
  const double tn = static_cast<double>(c.tn);
  const bool both_empty = c.tp + c.fp + c.fn == 0;
  MetricReport r;
  r.iou = ratio(tp, tp + fp + fn, both_empty);
  r.precision = ratio(tp, tp + fp, both_empty);
  r.recall = ratio(tp, tp + fn, both_empty);
  r.dice = ratio(2 * tp, 2 * tp + fp + fn, both_empty);
  r.f1 = r.dice;
  r.accuracy = c.total() > 0 ? (tp + tn) / static_cast<double>(c.total()) : 1.0;
  return r;
}

namespace {

constexpr int kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;

Eigen::VectorXd gaussian_kernel() {
  Eigen::VectorXd k(kSsimWindow);
  const int r = kSsimWindow / 2;
  for (int i = 0; i < kSsimWindow; ++i) {
    const double d = i - r;
    k(i) = std::exp(-d * d / (2 * kSsimSigma * kSsimSigma));
  }
  return k / k.sum();
}

/// Separable 'valid' filtering with kernel k along both axes.
Eigen::MatrixXd filter_valid(const Eigen::MatrixXd& m, const Eigen::VectorXd& k) {
  const Eigen::Index n = k.size();
  const Eigen::Index rows = m.rows() - n + 1;
  const Eigen::Index cols = m.cols() - n + 1;
  Eigen::MatrixXd tmp = Eigen::MatrixXd::Zero(m.rows(), cols);
  for (Eigen::Index i = 0; i < n; ++i) tmp += k(i) * m.middleCols(i, cols);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows, cols);
  for (Eigen::Index i = 0; i < n; ++i) out += k(i) * tmp.middleRows(i, rows);
  return out;
}

}  // namespace

double ssim(const GrayImage& a, const GrayImage& b) {
  require_same_size(a, b, "ssim: images differ in size");
  if (a.width() < kSsimWindow || a.height() < kSsimWindow) {
    throw Error(ErrorCode::TooSmall, "ssim needs images of at least 11x11 pixels");
  }
  const double c1 = std::pow(0.01 * 255.0, 2);
  const double c2 = std::pow(0.03 * 255.0, 2);
  const Eigen::MatrixXd x = a.pixels.cast<double>();
  const Eigen::MatrixXd y = b.pixels.cast<double>();
  const Eigen::VectorXd k = gaussian_kernel();

  const Eigen::ArrayXXd mx = filter_valid(x, k).array();
  const Eigen::ArrayXXd my = filter_valid(y, k).array();
  const Eigen::ArrayXXd sxx = filter_valid(x.cwiseProduct(x), k).array() - mx.square();
  const Eigen::ArrayXXd syy = filter_valid(y.cwiseProduct(y), k).array() - my.square();
  const Eigen::ArrayXXd sxy = filter_valid(x.cwiseProduct(y), k).array() - mx * my;

  const Eigen::ArrayXXd map = ((2 * mx * my + c1) * (2 * sxy + c2)) /
                              ((mx.square() + my.square() + c1) * (sxx + syy + c2));
  return map.mean();
}

namespace {

constexpr double kFar = 1e20;

/// 1-D squared distance transform (lower envelope of parabolas).
void dt1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v, std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  int k = 0;
  v[0] = 0;
  z[0] = -kFar;
  z[1] = kFar;
  for (int q = 1; q < n; ++q) {
    double s = ((f[q] + double(q) * q) - (f[v[k]] + double(v[k]) * v[k])) / (2.0 * q - 2.0 * v[k]);
    while (s <= z[k]) {
      --k;
      s = ((f[q] + double(q) * q) - (f[v[k]] + double(v[k]) * v[k])) / (2.0 * q - 2.0 * v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kFar;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = q - v[k];
    d[q] = dq * dq + f[v[k]];
  }
}

/// Squared Euclidean distance from every pixel to the nearest set pixel.
Eigen::MatrixXd squared_distance_to(const BinaryMask& set) {
  const Eigen::Index h = set.height();
  const Eigen::Index w = set.width();
  Eigen::MatrixXd g(h, w);
  for (Eigen::Index y = 0; y < h; ++y)
    for (Eigen::Index x = 0; x < w; ++x) g(y, x) = set.at(x, y) ? 0.0 : kFar;

  const Eigen::Index n = std::max(h, w);
  std::vector<double> f(n), d(n), z(n + 1);
  std::vector<int> v(n);
  for (Eigen::Index x = 0; x < w; ++x) {
    f.resize(h);
    d.resize(h);
    for (Eigen::Index y = 0; y < h; ++y) f[y] = g(y, x);
    dt1d(f, d, v, z);
    for (Eigen::Index y = 0; y < h; ++y) g(y, x) = d[y];
  }
  for (Eigen::Index y = 0; y < h; ++y) {
    f.resize(w);
    d.resize(w);
    for (Eigen::Index x = 0; x < w; ++x) f[x] = g(y, x);
    dt1d(f, d, v, z);
    for (Eigen::Index x = 0; x < w; ++x) g(y, x) = d[x];
  }
  return g;
}

BinaryMask boundary_of(const BinaryMask& m) {
  BinaryMask out(m.width(), m.height());
  const Eigen::Index w = m.width();
  const Eigen::Index h = m.height();
  for (Eigen::Index y = 0; y < h; ++y) {
    for (Eigen::Index x = 0; x < w; ++x) {
      if (!m.at(x, y)) continue;
      const bool edge = x == 0 || y == 0 || x == w - 1 || y == h - 1 || !m.at(x - 1, y) || !m.at(x + 1, y) ||
                        !m.at(x, y - 1) || !m.at(x, y + 1);
      out.set(x, y, edge);
    }
  }
  return out;
}

double directed(const BinaryMask& from, const Eigen::MatrixXd& dist_to) {
  double worst = 0;
  for (Eigen::Index y = 0; y < from.height(); ++y)
    for (Eigen::Index x = 0; x < from.width(); ++x)
      if (from.at(x, y)) worst = std::max(worst, dist_to(y, x));
  return worst;
}

}  // namespace

double hausdorff(const BinaryMask& a, const BinaryMask& b, HausdorffMode mode) {
  require_same_size(a, b, "hausdorff: masks differ in size");
  if (a.empty() || b.empty()) throw Error(ErrorCode::EmptyMask, "hausdorff distance is undefined for an empty mask");
  const BinaryMask pa = mode == HausdorffMode::Boundary ? boundary_of(a) : a;
  const BinaryMask pb = mode == HausdorffMode::Boundary ? boundary_of(b) : b;
  const double ab = directed(pa, squared_distance_to(pb));
  const double ba = directed(pb, squared_distance_to(pa));
  return std::sqrt(std::max(ab, ba));
}

double cohens_kappa(std::span<const std::string> r1, std::span<const std::string> r2) {
  if (r1.size() != r2.size()) throw Error(ErrorCode::DimensionMismatch, "rating vectors differ in length");
  if (r1.empty()) throw Error(ErrorCode::InsufficientSamples, "no ratings");
  std::map<std::string, std::pair<double, double>> marginals;
  double agree = 0;
  for (std::size_t i = 0; i < r1.size(); ++i) {
    if (r1[i] == r2[i]) agree += 1;
    marginals[r1[i]].first += 1;
    marginals[r2[i]].second += 1;
  }
  const double n = static_cast<double>(r1.size());
  const double po = agree / n;
  double pe = 0;
  for (const auto& [label, m] : marginals) pe += (m.first / n) * (m.second / n);
  if (pe >= 1.0) throw Error(ErrorCode::DegenerateAgreement, "expected agreement is 1; kappa is undefined");
  return (po - pe) / (1.0 - pe);
}

namespace {

// Absolute tolerance for treating differences as zero or tied. Metric values
// are O(1), so float noise from subtraction stays far below this.
constexpr double kTieTolerance = 1e-9;

}  // namespace

WilcoxonResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::DimensionMismatch, "paired samples differ in length");
  std::vector<double> d;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double diff = x[i] - y[i];
    if (std::abs(diff) > kTieTolerance) d.push_back(diff);
  }
  if (d.empty()) throw Error(ErrorCode::AllZeroDifferences, "every paired difference is zero");
  const int n = static_cast<int>(d.size());

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int j) { return std::abs(d[i]) < std::abs(d[j]); });

  // Doubled mid-ranks keep the exact distribution on integers.
  std::vector<int> rank2(n);
  std::vector<int> tie_sizes;
  for (int i = 0; i < n;) {
    int j = i + 1;
    while (j < n && std::abs(d[order[j]]) - std::abs(d[order[i]]) <= kTieTolerance) ++j;
    const int doubled = i + 1 + j;  // (i+1) + j is twice the mean of ranks i+1..j
    for (int k = i; k < j; ++k) rank2[order[k]] = doubled;
    tie_sizes.push_back(j - i);
    i = j;
  }

  WilcoxonResult res;
  res.n = n;
  int w2_plus = 0;
  int total2 = 0;
  for (int i = 0; i < n; ++i) {
    total2 += rank2[i];
    if (d[i] > 0) w2_plus += rank2[i];
  }
  res.w_plus = w2_plus / 2.0;
  res.w_minus = (total2 - w2_plus) / 2.0;
  res.statistic = std::min(res.w_plus, res.w_minus);

  if (n <= kWilcoxonExactLimit) {
    // counts[s] = number of sign assignments whose doubled W+ equals s.
    std::vector<double> counts(static_cast<std::size_t>(total2) + 1, 0.0);
    counts[0] = 1;
    int reach = 0;
    for (int i = 0; i < n; ++i) {
      for (int s = reach; s >= 0; --s) {
        if (counts[s] != 0) counts[s + rank2[i]] += counts[s];
      }
      reach += rank2[i];
    }
    const double all = std::ldexp(1.0, n);
    double le = 0, ge = 0;
    for (int s = 0; s <= total2; ++s) {
      if (s <= w2_plus) le += counts[s];
      if (s >= w2_plus) ge += counts[s];
    }
    res.p_value = std::min(1.0, 2.0 * std::min(le, ge) / all);
    res.exact = true;
    return res;
  }

  const double nn = n;
  const double mean = nn * (nn + 1) / 4.0;
  double var = nn * (nn + 1) * (2 * nn + 1) / 24.0;
  for (int t : tie_sizes) var -= (double(t) * t * t - t) / 48.0;
  const double dev = std::abs(res.w_plus - mean);
  const double zscore = var > 0 ? std::max(0.0, dev - 0.5) / std::sqrt(var) : 0.0;
  res.p_value = std::min(1.0, std::erfc(zscore / std::sqrt(2.0)));
  res.exact = false;
  return res;
}

std::vector<GroupReport> batch_report(std::span<const MetricRecord> records) {
  std::vector<GroupReport> groups;
  std::vector<std::vector<const MetricReport*>> members;
  for (const auto& rec : records) {
    auto it = std::find_if(groups.begin(), groups.end(), [&](const GroupReport& g) { return g.group == rec.group; });
    if (it == groups.end()) {
      groups.push_back(GroupReport{rec.group, 0, {}});
      members.emplace_back();
      it = groups.end() - 1;
    }
    members[static_cast<std::size_t>(it - groups.begin())].push_back(&rec.report);
  }
  for (std::size_t g = 0; g < groups.size(); ++g) {
    groups[g].count = members[g].size();
    for (std::size_t m = 0; m < kMetricNames.size(); ++m) {
      std::vector<double> vals;
      for (const auto* r : members[g]) {
        const double v = metric_value(*r, m);
        if (!std::isnan(v)) vals.push_back(v);
      }
      MetricSummary s;
      s.count = vals.size();
      if (!vals.empty()) {
        const Eigen::Map<const Eigen::ArrayXd> a(vals.data(), static_cast<Eigen::Index>(vals.size()));
        s.mean = a.mean();
        s.sd = vals.size() > 1 ? std::sqrt((a - s.mean).square().sum() / static_cast<double>(vals.size() - 1)) : 0.0;
      }
      groups[g].metrics[m] = s;
    }
  }
  return groups;
}

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "";
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

}  // namespace

void write_records_csv(std::ostream& out, std::span<const MetricRecord> records) {
  out << "image,group";
  for (auto name : kMetricNames) out << ',' << name;
  out << '\n';
  for (const auto& r : records) {
    out << csv::escape(r.image) << ',' << csv::escape(r.group);
    for (std::size_t m = 0; m < kMetricNames.size(); ++m) out << ',' << num(metric_value(r.report, m));
    out << '\n';
  }
}

void write_groups_csv(std::ostream& out, std::span<const GroupReport> groups) {
  out << "group,count";
  for (auto name : kMetricNames) out << ',' << name << "_mean," << name << "_sd";
  out << '\n';
  for (const auto& g : groups) {
    out << csv::escape(g.group) << ',' << g.count;
    for (const auto& s : g.metrics) out << ',' << num(s.mean) << ',' << num(s.sd);
    out << '\n';
  }
}

std::vector<MetricRecord> read_records_csv(std::istream& in) {
  const auto rows = csv::read(in);
  if (rows.empty()) return {};
  const auto& header = rows.front();
  const int image_col = csv::column(header, "image");
  if (image_col < 0) throw Error(ErrorCode::CorruptData, "metrics CSV needs an 'image' column");
  int group_col = csv::column(header, "group");
  if (group_col < 0) group_col = csv::column(header, "model");
  std::array<int, kMetricNames.size()> cols{};
  for (std::size_t m = 0; m < kMetricNames.size(); ++m) cols[m] = csv::column(header, kMetricNames[m]);
  if (cols[5] < 0) cols[5] = csv::column(header, "f1 score");

  std::vector<MetricRecord> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    auto cell = [&](int c) -> std::string { return c >= 0 && c < static_cast<int>(row.size()) ? row[c] : ""; };
    MetricRecord rec;
    rec.image = cell(image_col);
    rec.group = group_col >= 0 ? cell(group_col) : "all";
    for (std::size_t m = 0; m < kMetricNames.size(); ++m) {
      const std::string v = cell(cols[m]);
      if (v.empty()) continue;
      try {
        std::size_t used = 0;
        metric_value(rec.report, m) = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
      } catch (const std::exception&) {
        throw Error(ErrorCode::CorruptData, "bad value '" + v + "' in column " + std::string(kMetricNames[m]));
      }
    }
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace bfseg
