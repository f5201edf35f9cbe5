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

// Brute-force reference implementations used only by tests. Each one follows
// the textbook definition with explicit loops and shares no code with the
// library routines it checks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "bfseg/image.hpp"

namespace oracle {

using Grid = std::vector<std::vector<double>>;  // grid[row][col]

inline Grid to_grid(const bfseg::PlaneD& p) {
  Grid g(p.rows(), std::vector<double>(p.cols()));
  for (int r = 0; r < p.rows(); ++r)
    for (int c = 0; c < p.cols(); ++c) g[r][c] = p(r, c);
  return g;
}

inline bfseg::PlaneD to_plane(const Grid& g) {
  bfseg::PlaneD p(g.size(), g[0].size());
  for (size_t r = 0; r < g.size(); ++r)
    for (size_t c = 0; c < g[0].size(); ++c) p(r, c) = g[r][c];
  return p;
}

inline double mean(const Grid& g) {
  double s = 0;
  int n = 0;
  for (const auto& row : g)
    for (double v : row) {
      s += v;
      ++n;
    }
  return s / n;
}

inline double ssdlm(const Grid& g) {
  const double m = mean(g);
  double ss = 0;
  int n = 0;
  for (const auto& row : g)
    for (double v : row) {
      ss += (v - m) * (v - m);
      ++n;
    }
  return std::sqrt(ss / n);
}

/// Half the sum over every pixel and each in-bounds 8-neighbour.
inline double cssni(const Grid& g) {
  const int rows = static_cast<int>(g.size());
  const int cols = static_cast<int>(g[0].size());
  double s = 0;
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      for (int di = -1; di <= 1; ++di)
        for (int dj = -1; dj <= 1; ++dj) {
          if (di == 0 && dj == 0) continue;
          const int m = i + di, n = j + dj;
          if (m < 0 || n < 0 || m >= rows || n >= cols) continue;
          s += (g[i][j] - g[m][n]) * (g[i][j] - g[m][n]);
        }
  return s / 2;
}

/// 1/2 * mean over pairs i<j of (z_i - z_j)^2 / d, d = |i - j| in the flattened
/// sequence, or the 2D Euclidean distance when `euclidean`.
inline double adjusted_variogram(const Grid& g, bool euclidean = false) {
  std::vector<double> z;
  std::vector<std::pair<int, int>> pos;
  for (size_t r = 0; r < g.size(); ++r)
    for (size_t c = 0; c < g[r].size(); ++c) {
      z.push_back(g[r][c]);
      pos.emplace_back(static_cast<int>(r), static_cast<int>(c));
    }
  double s = 0;
  long pairs = 0;
  for (size_t i = 0; i < z.size(); ++i)
    for (size_t j = i + 1; j < z.size(); ++j) {
      double d = static_cast<double>(j - i);
      if (euclidean) d = std::hypot(pos[i].first - pos[j].first, pos[i].second - pos[j].second);
      s += (z[i] - z[j]) * (z[i] - z[j]) / d;
      ++pairs;
    }
  return pairs ? 0.5 * s / pairs : 0.0;
}

/// Moran's I with w_ij = 1 / euclidean distance, w_ii = 0. Empty when the
/// variance is zero.
inline std::optional<double> morans_i(const Grid& g) {
  std::vector<double> x;
  std::vector<std::pair<int, int>> pos;
  for (size_t r = 0; r < g.size(); ++r)
    for (size_t c = 0; c < g[r].size(); ++c) {
      x.push_back(g[r][c]);
      pos.emplace_back(static_cast<int>(r), static_cast<int>(c));
    }
  const double n = static_cast<double>(x.size());
  double xbar = 0;
  for (double v : x) xbar += v;
  xbar /= n;
  double num = 0, wsum = 0, den = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    den += (x[i] - xbar) * (x[i] - xbar);
    for (size_t j = 0; j < x.size(); ++j) {
      if (i == j) continue;
      const double w = 1.0 / std::hypot(pos[i].first - pos[j].first, pos[i].second - pos[j].second);
      wsum += w;
      num += w * (x[i] - xbar) * (x[j] - xbar);
    }
  }
  if (den == 0) return std::nullopt;
  return n * num / (wsum * den);
}

/// GLCM homogeneity sum P(i,j) / (1 + |i - j|) over horizontal-right
/// neighbours, intensities quantised to `levels`.
inline double glcm_homogeneity(const Grid& g, int levels = 16) {
  std::vector<std::vector<double>> P(levels, std::vector<double>(levels, 0));
  double total = 0;
  for (const auto& row : g)
    for (size_t c = 0; c + 1 < row.size(); ++c) {
      const int a = std::min(levels - 1, static_cast<int>(row[c] * levels / 256.0));
      const int b = std::min(levels - 1, static_cast<int>(row[c + 1] * levels / 256.0));
      P[a][b] += 1;
      P[b][a] += 1;
      total += 2;
    }
  double h = 0;
  for (int i = 0; i < levels; ++i)
    for (int j = 0; j < levels; ++j) h += P[i][j] / total / (1.0 + std::abs(i - j));
  return h;
}

/// Literal per-window SSIM with an 11x11 Gaussian (sigma 1.5), averaged over
/// all fully-contained windows.
inline double ssim(const bfseg::Plane8& a, const bfseg::Plane8& b) {
  const int win = 11;
  double w[win][win];
  double wsum = 0;
  for (int i = 0; i < win; ++i)
    for (int j = 0; j < win; ++j) {
      w[i][j] = std::exp(-((i - 5) * (i - 5) + (j - 5) * (j - 5)) / (2 * 1.5 * 1.5));
      wsum += w[i][j];
    }
  for (auto& row : w)
    for (double& v : row) v /= wsum;
  const double C1 = (0.01 * 255) * (0.01 * 255), C2 = (0.03 * 255) * (0.03 * 255);
  double total = 0;
  int count = 0;
  for (int y = 0; y + win <= a.rows(); ++y)
    for (int x = 0; x + win <= a.cols(); ++x) {
      double mx = 0, my = 0;
      for (int i = 0; i < win; ++i)
        for (int j = 0; j < win; ++j) {
          mx += w[i][j] * a(y + i, x + j);
          my += w[i][j] * b(y + i, x + j);
        }
      double vx = 0, vy = 0, cxy = 0;
      for (int i = 0; i < win; ++i)
        for (int j = 0; j < win; ++j) {
          const double dx = a(y + i, x + j) - mx, dy = b(y + i, x + j) - my;
          vx += w[i][j] * dx * dx;
          vy += w[i][j] * dy * dy;
          cxy += w[i][j] * dx * dy;
        }
      total += ((2 * mx * my + C1) * (2 * cxy + C2)) / ((mx * mx + my * my + C1) * (vx + vy + C2));
      ++count;
    }
  return total / count;
}

inline double hausdorff(const bfseg::BinaryMask& a, const bfseg::BinaryMask& b) {
  std::vector<std::pair<int, int>> pa, pb;
  for (int y = 0; y < a.height(); ++y)
    for (int x = 0; x < a.width(); ++x) {
      if (a.at(x, y)) pa.emplace_back(x, y);
      if (b.at(x, y)) pb.emplace_back(x, y);
    }
  auto directed = [](const auto& from, const auto& to) {
    double worst = 0;
    for (auto [x, y] : from) {
      double best = std::numeric_limits<double>::infinity();
      for (auto [u, v] : to) best = std::min(best, std::hypot(double(x - u), double(y - v)));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(directed(pa, pb), directed(pb, pa));
}

/// Two-sided exact signed-rank p by enumerating every sign assignment.
inline double wilcoxon_p_enumerate(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> d;
  for (size_t i = 0; i < x.size(); ++i)
    if (std::abs(x[i] - y[i]) > 1e-9) d.push_back(x[i] - y[i]);
  const int n = static_cast<int>(d.size());
  std::vector<double> rank(n);
  for (int i = 0; i < n; ++i) {
    int less = 0, equal = 0;
    for (int j = 0; j < n; ++j) {
      if (std::abs(std::abs(d[j]) - std::abs(d[i])) <= 1e-9) ++equal;
      else if (std::abs(d[j]) < std::abs(d[i])) ++less;
    }
    rank[i] = less + (equal + 1) / 2.0;
  }
  double w = 0;
  for (int i = 0; i < n; ++i)
    if (d[i] > 0) w += rank[i];
  long le = 0, ge = 0;
  for (long mask = 0; mask < (1L << n); ++mask) {
    double s = 0;
    for (int i = 0; i < n; ++i)
      if (mask & (1L << i)) s += rank[i];
    if (s <= w + 1e-9) ++le;
    if (s >= w - 1e-9) ++ge;
  }
  return std::min(1.0, 2.0 * std::min(le, ge) / std::ldexp(1.0, n));
}

}  // namespace oracle
