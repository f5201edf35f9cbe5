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

#include <random>

#include "bfseg/error.hpp"
#include "bfseg/fuzzy.hpp"

using namespace bfseg;

TEST_CASE("default memberships at the breakpoints") {
  const FuzzyParams p;
  CHECK(defuzzify(80, p) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(defuzzify(110, p) == doctest::Approx(127.0).epsilon(1e-12));
  CHECK(defuzzify(140, p) == doctest::Approx(255.0).epsilon(1e-12));
  CHECK(mu_dark(95, p) == doctest::Approx(0.5));
  CHECK(mu_gray(95, p) == doctest::Approx(0.5));
  CHECK(mu_bright(95, p) == 0.0);
  CHECK(defuzzify(95, p) == doctest::Approx(63.5));
  CHECK(defuzzify(125, p) == doctest::Approx(191.0));
  CHECK(defuzzify(0, p) == 0.0);
  CHECK(defuzzify(255, p) == 255.0);
}

TEST_CASE("partition of unity and monotonicity over 8-bit intensities") {
  const FuzzyParams p;
  double prev = -1;
  for (int x = 0; x <= 255; ++x) {
    const double sum = mu_dark(x, p) + mu_gray(x, p) + mu_bright(x, p);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    const double f = defuzzify(x, p);
    CHECK(f >= prev);
    prev = f;
  }
}

TEST_CASE("monotone for random slider settings") {
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> shift(20, 235);
  for (int i = 0; i < 300; ++i) {
    const double b = shift(rng);
    const double span = std::uniform_real_distribution<double>(1, std::min(b, 255 - b))(rng);
    const FuzzyParams p = apply_sliders(b, span);
    double prev = -1;
    for (double x = 0; x <= 255; x += 0.5) {
      const double f = defuzzify(x, p);
      REQUIRE(f >= prev - 1e-12);
      REQUIRE(mu_dark(x, p) + mu_gray(x, p) + mu_bright(x, p) == doctest::Approx(1.0));
      prev = f;
    }
  }
}

TEST_CASE("classification cuts") {
  const FuzzyParams p;
  CHECK(classify(50, p) == FuzzyClass::Black);
  CHECK(classify(200, p) == FuzzyClass::White);
  CHECK(classify(110, p) == FuzzyClass::Ambiguous);
  // Defuzzified 95 is 63.5 (black) while raw 95 sits between the cuts.
  CHECK(classify(95, p) == FuzzyClass::Black);
  CHECK(classify(95, p, ClassifyOn::Raw) == FuzzyClass::Ambiguous);
  // Exactly on a cut stays ambiguous.
  CHECK(classify(80, p, ClassifyOn::Raw) == FuzzyClass::Ambiguous);
  CHECK(classify(140, p, ClassifyOn::Raw) == FuzzyClass::Ambiguous);
}

TEST_CASE("sliders reproduce the default geometry") {
  const FuzzyParams p = apply_sliders(110, 30);
  CHECK(p == FuzzyParams{});
  const FuzzyParams q = apply_sliders(120, 20);
  CHECK(q.a == 100);
  CHECK(q.b == 120);
  CHECK(q.c == 140);
  CHECK(q.alpha == 120);
  CHECK(q.beta == 120);
  CHECK(q.lower_cut == 80);
  CHECK_THROWS_AS(apply_sliders(20, 30), Error);
  CHECK_THROWS_AS(apply_sliders(240, 30), Error);
  CHECK_THROWS_AS(apply_sliders(110, 0), Error);
}

TEST_CASE("invalid parameter sets") {
  FuzzyParams p;
  p.a = 120;
  CHECK_THROWS_AS(p.validate(), Error);
  p = {};
  p.v_gray = 300;
  CHECK_THROWS_AS(p.validate(), Error);
  p = {};
  p.alpha = p.a;
  CHECK_THROWS_AS(mu_dark(90, p), Error);
  CHECK(classify_on_from_string("raw") == ClassifyOn::Raw);
  CHECK_THROWS_AS(classify_on_from_string("median"), Error);
}
