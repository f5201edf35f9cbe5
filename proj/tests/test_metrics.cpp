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

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "bfseg/metrics.hpp"
#include "oracles.hpp"

using namespace bfseg;

namespace {

BinaryMask random_mask(std::mt19937& rng, int w, int h, double p) {
  std::bernoulli_distribution fg(p);
  BinaryMask m(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) m.set(x, y, fg(rng));
  return m;
}

std::vector<MetricRecord> reference_rows() {
  std::ifstream in(BFSEG_TEST_DATA "/per_image_scores.csv");
  REQUIRE(in);
  return read_records_csv(in);
}

std::vector<double> column(const std::vector<MetricRecord>& rows, const std::string& group, double MetricReport::*field) {
  std::vector<double> out;
  for (const auto& r : rows)
    if (r.group == group) out.push_back(r.report.*field);
  return out;
}

}  // namespace

TEST_CASE("confusion counts and ratios") {
  BinaryMask pred(4, 1), truth(4, 1);
  pred.set(0, 0, true);
  pred.set(1, 0, true);
  truth.set(1, 0, true);
  truth.set(2, 0, true);
  const auto c = confusion(pred, truth);
  CHECK(c == ConfusionCounts{1, 1, 1, 1});
  const auto r = pixel_metrics(c);
  CHECK(r.iou == doctest::Approx(1.0 / 3));
  CHECK(r.dice == doctest::Approx(0.5));
  CHECK(r.precision == doctest::Approx(0.5));
  CHECK(r.recall == doctest::Approx(0.5));
  CHECK(r.accuracy == doctest::Approx(0.5));
  CHECK_THROWS_AS(confusion(pred, BinaryMask(3, 1)), Error);
}

TEST_CASE("degenerate conventions") {
  BinaryMask empty(5, 5), full(5, 5, true);
  const auto both = pixel_metrics(confusion(empty, empty));
  CHECK(both.iou == 1.0);
  CHECK(both.dice == 1.0);
  CHECK(both.precision == 1.0);
  CHECK(both.recall == 1.0);
  CHECK(both.accuracy == 1.0);
  const auto miss = pixel_metrics(confusion(empty, full));
  CHECK(miss.iou == 0.0);
  CHECK(miss.precision == 0.0);
  CHECK(miss.recall == 0.0);
  const auto extra = pixel_metrics(confusion(full, empty));
  CHECK(extra.iou == 0.0);
  CHECK(extra.recall == 0.0);
  CHECK(extra.accuracy == 0.0);
}

TEST_CASE("metric identities on random pairs") {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> density(0, 1);
  for (int i = 0; i < 10000; ++i) {
    const double pa = i % 50 == 0 ? 0.0 : density(rng);
    const double pb = i % 70 == 0 ? 0.0 : density(rng);
    const auto a = random_mask(rng, 8, 6, pa);
    const auto b = random_mask(rng, 8, 6, pb);
    const auto r = pixel_metrics(confusion(a, b));
    REQUIRE(r.f1 == r.dice);
    REQUIRE(r.dice == doctest::Approx(2 * r.iou / (1 + r.iou)).epsilon(1e-12));
    for (double v : {r.iou, r.dice, r.precision, r.recall, r.accuracy}) {
      REQUIRE(v >= 0.0);
      REQUIRE(v <= 1.0);
    }
    REQUIRE(r.iou <= r.dice);
    const auto s = pixel_metrics(confusion(b, a));
    REQUIRE(s.iou == r.iou);
    REQUIRE(s.precision == r.recall);
  }
}

TEST_CASE("ssim matches the per-window oracle") {
  std::mt19937 rng(2);
  std::uniform_int_distribution<int> v(0, 255);
  for (int t = 0; t < 5; ++t) {
    GrayImage a(20 + t, 14 + t), b(20 + t, 14 + t);
    for (int i = 0; i < a.pixels.size(); ++i) {
      a.pixels.data()[i] = static_cast<std::uint8_t>(v(rng));
      b.pixels.data()[i] = static_cast<std::uint8_t>(t % 2 ? v(rng) : std::clamp(a.pixels.data()[i] + v(rng) % 21 - 10, 0, 255));
    }
    CHECK(ssim(a, b) == doctest::Approx(oracle::ssim(a.pixels, b.pixels)).epsilon(1e-9));
    CHECK(ssim(a, a) == doctest::Approx(1.0));
    CHECK(ssim(a, b) == doctest::Approx(ssim(b, a)));
  }
  CHECK_THROWS_AS(ssim(GrayImage(10, 30), GrayImage(10, 30)), Error);
}

TEST_CASE("hausdorff against brute force") {
  std::mt19937 rng(12);
  for (int t = 0; t < 60; ++t) {
    const auto a = random_mask(rng, 23, 17, 0.02 + 0.01 * (t % 10));
    const auto b = random_mask(rng, 23, 17, 0.03);
    const auto c = random_mask(rng, 23, 17, 0.05);
    if (a.empty() || b.empty() || c.empty()) continue;
    const double ab = hausdorff(a, b);
    REQUIRE(ab == doctest::Approx(oracle::hausdorff(a, b)).epsilon(1e-12));
    REQUIRE(ab == hausdorff(b, a));
    REQUIRE(hausdorff(a, a) == 0.0);
    REQUIRE(ab <= hausdorff(a, c) + hausdorff(c, b) + 1e-9);
  }
  BinaryMask one(10, 10), other(10, 10);
  one.set(1, 1, true);
  other.set(4, 5, true);
  CHECK(hausdorff(one, other) == doctest::Approx(5.0));
  CHECK_THROWS_AS(hausdorff(one, BinaryMask(10, 10)), Error);
}

TEST_CASE("boundary hausdorff ignores interiors") {
  BinaryMask filled(30, 30), ring(30, 30);
  for (int y = 5; y < 25; ++y)
    for (int x = 5; x < 25; ++x) {
      filled.set(x, y, true);
      ring.set(x, y, x == 5 || y == 5 || x == 24 || y == 24);
    }
  CHECK(hausdorff(filled, ring) == doctest::Approx(9.0));
  CHECK(hausdorff(filled, ring, HausdorffMode::Boundary) == 0.0);
}

TEST_CASE("cohen's kappa") {
  std::vector<std::string> r1{"a", "a", "b", "b"}, r2{"a", "b", "b", "b"};
  CHECK(cohens_kappa(r1, r2) == doctest::Approx(0.5));
  CHECK(cohens_kappa(r1, r1) == doctest::Approx(1.0));
  std::vector<std::string> same{"x", "x"};
  CHECK_THROWS_AS(cohens_kappa(same, same), Error);
  CHECK_THROWS_AS(cohens_kappa(r1, same), Error);

  std::mt19937 rng(5);
  std::vector<std::string> a, b;
  const char* labels[] = {"good", "fair", "poor"};
  for (int i = 0; i < 20000; ++i) {
    a.push_back(labels[rng() % 3]);
    b.push_back(labels[rng() % 3]);
  }
  CHECK(std::abs(cohens_kappa(a, b)) < 0.03);
}

TEST_CASE("wilcoxon: all-positive ten pairs") {
  std::vector<double> x{10, 11, 12, 13, 14, 15, 16, 17, 18, 19}, y(10, 0.0);
  const auto r = wilcoxon_signed_rank(x, y);
  CHECK(r.exact);
  CHECK(r.n == 10);
  CHECK(r.w_plus == 55);
  CHECK(r.w_minus == 0);
  CHECK(r.p_value == doctest::Approx(2.0 / 1024).epsilon(1e-12));
  CHECK_THROWS_AS(wilcoxon_signed_rank(x, x), Error);
}

TEST_CASE("wilcoxon exact p matches sign enumeration, ties included") {
  std::mt19937 rng(31);
  std::uniform_int_distribution<int> v(-6, 6);
  for (int t = 0; t < 300; ++t) {
    const int n = 3 + t % 12;
    std::vector<double> x(n), y(n);
    for (int i = 0; i < n; ++i) {
      x[i] = v(rng) * 0.05 + 0.5;
      y[i] = v(rng) * 0.05 + 0.5;
    }
    bool any = false;
    for (int i = 0; i < n; ++i) any |= std::abs(x[i] - y[i]) > 1e-9;
    if (!any) continue;
    const auto r = wilcoxon_signed_rank(x, y);
    REQUIRE(r.p_value == doctest::Approx(oracle::wilcoxon_p_enumerate(x, y)).epsilon(1e-9));
    REQUIRE(r.w_plus + r.w_minus == doctest::Approx(r.n * (r.n + 1) / 2.0));
  }
}

TEST_CASE("wilcoxon p agrees with Monte-Carlo sign flipping") {
  std::mt19937 rng(77);
  std::normal_distribution<double> noise(0.3, 1.0);
  for (int n : {15, 22, 40}) {
    std::vector<double> d(n), zero(n, 0.0);
    for (double& v : d) v = noise(rng);
    const auto r = wilcoxon_signed_rank(d, zero);
    CHECK(r.exact == (n <= kWilcoxonExactLimit));
    // Rank magnitudes once, then flip signs at random.
    std::vector<double> mag(n);
    for (int i = 0; i < n; ++i) {
      int less = 0;
      for (int j = 0; j < n; ++j) less += std::abs(d[j]) < std::abs(d[i]);
      mag[i] = less + 1;
    }
    const double mean = n * (n + 1) / 4.0;
    const double obs = std::abs(r.w_plus - mean);
    const int trials = 200000;
    int extreme = 0;
    std::bernoulli_distribution coin(0.5);
    for (int t = 0; t < trials; ++t) {
      double w = 0;
      for (int i = 0; i < n; ++i)
        if (coin(rng)) w += mag[i];
      extreme += std::abs(w - mean) >= obs - 1e-9;
    }
    const double mc = static_cast<double>(extreme) / trials;
    const double se = std::sqrt(std::max(mc * (1 - mc), 1e-6) / trials);
    if (r.exact) {
      CHECK(std::abs(r.p_value - mc) <= 3 * se);
    } else {
      // The normal approximation is close, not exact.
      CHECK(std::abs(r.p_value - mc) <= 0.01);
    }
  }
}

TEST_CASE("wilcoxon normal approximation for large n") {
  std::vector<double> x(30), y(30, 0.0);
  for (int i = 0; i < 30; ++i) x[i] = i + 1;
  const auto r = wilcoxon_signed_rank(x, y);
  CHECK_FALSE(r.exact);
  const double sd = std::sqrt(30.0 * 31 * 61 / 24);
  const double z = (232.5 - 0.5) / sd;
  CHECK(r.p_value == doctest::Approx(std::erfc(z / std::sqrt(2.0))).epsilon(1e-9));
}

TEST_CASE("reference per-image rows: averages and paired tests") {
  const auto rows = reference_rows();
  REQUIRE(rows.size() == 30);
  const auto groups = batch_report(rows);
  REQUIRE(groups.size() == 3);
  CHECK(groups[0].group == "Our Model");
  CHECK(groups[0].count == 10);
  CHECK(groups[0].metrics[0].mean == doctest::Approx(0.431).epsilon(1e-9));
  CHECK(groups[0].metrics[5].mean == doctest::Approx(0.601).epsilon(1e-9));
  CHECK(std::isnan(groups[0].metrics[6].mean));  // ssim column absent

  const auto ours = column(rows, "Our Model", &MetricReport::iou);
  const auto star = column(rows, "Stardist", &MetricReport::iou);
  const auto cell = column(rows, "Cellpose", &MetricReport::iou);
  CHECK(wilcoxon_signed_rank(ours, star).p_value == doctest::Approx(0.001953125));
  CHECK(wilcoxon_signed_rank(ours, cell).p_value <= 0.006);
}

TEST_CASE("record csv round-trip and sample sd") {
  std::vector<MetricRecord> recs(3);
  recs[0] = {"a.png", "g1", {}};
  recs[1] = {"b, with comma.png", "g1", {}};
  recs[2] = {"c.png", "g2", {}};
  recs[0].report.iou = 0.2;
  recs[1].report.iou = 0.4;
  recs[2].report.iou = 0.9;
  recs[0].report.hausdorff = 3;
  std::stringstream ss;
  write_records_csv(ss, recs);
  const auto back = read_records_csv(ss);
  REQUIRE(back.size() == 3);
  CHECK(back[1].image == "b, with comma.png");
  CHECK(back[1].report.iou == 0.4);
  CHECK(std::isnan(back[1].report.hausdorff));
  CHECK(back[0].report.hausdorff == 3);
  const auto g = batch_report(back);
  REQUIRE(g.size() == 2);
  CHECK(g[0].metrics[0].mean == doctest::Approx(0.3));
  CHECK(g[0].metrics[0].sd == doctest::Approx(std::sqrt(0.02)));
  CHECK(g[1].metrics[0].sd == 0.0);
  CHECK(g[0].metrics[7].count == 1);
  std::stringstream out;
  write_groups_csv(out, g);
  CHECK(out.str().find("g2") != std::string::npos);
}
