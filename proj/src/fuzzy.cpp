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

#include "bfseg/fuzzy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "bfseg/error.hpp"

namespace bfseg {

namespace {

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorCode::InvalidParams, msg); }

}  // namespace

void FuzzyParams::validate() const {
  for (double v : {a, b, c, alpha, beta, v_dark, v_gray, v_bright, lower_cut, upper_cut}) {
    if (!std::isfinite(v)) invalid("fuzzy parameters must be finite");
  }
  if (!(0.0 <= a && a < b && b < c && c <= 255.0)) {
    std::ostringstream os;
    os << "need 0 <= a < b < c <= 255 (a=" << a << ", b=" << b << ", c=" << c << ")";
    invalid(os.str());
  }
  if (!(alpha > a && alpha <= 255.0)) invalid("alpha must lie in (a, 255]");
  if (!(beta >= 0.0 && beta < c)) invalid("beta must lie in [0, c)");
  if (!(v_dark < v_gray && v_gray < v_bright)) invalid("output levels must satisfy v_dark < v_gray < v_bright");
  if (!(lower_cut < upper_cut)) invalid("lower_cut must be below upper_cut");
}

std::string_view to_string(FuzzyClass c) {
  switch (c) {
    case FuzzyClass::Black: return "black";
    case FuzzyClass::White: return "white";
    case FuzzyClass::Ambiguous: return "ambiguous";
  }
  return "?";
}

std::string_view to_string(ClassifyOn c) { return c == ClassifyOn::Raw ? "raw" : "defuzzified"; }

ClassifyOn classify_on_from_string(std::string_view s) {
  if (s == "raw") return ClassifyOn::Raw;
  if (s == "defuzzified" || s == "fuzzy") return ClassifyOn::Defuzzified;
  invalid("classify_on must be 'raw' or 'defuzzified'");
}

double mu_dark(double x, const FuzzyParams& p) {
  if (p.alpha == p.a) invalid("mu_dark: alpha equals a");
  if (x <= p.a) return 1.0;
  return std::max((p.alpha - x) / (p.alpha - p.a), 0.0);
}

double mu_gray(double x, const FuzzyParams& p) {
  if (p.b == p.a || p.c == p.b) invalid("mu_gray: degenerate triangle");
  return std::max(std::min((x - p.a) / (p.b - p.a), (p.c - x) / (p.c - p.b)), 0.0);
}

double mu_bright(double x, const FuzzyParams& p) {
  if (p.c == p.beta) invalid("mu_bright: c equals beta");
  if (x >= p.c) return 1.0;
  return std::max((x - p.beta) / (p.c - p.beta), 0.0);
}

double defuzzify(double x, const FuzzyParams& p) {
  const double ud = mu_dark(x, p);
  const double ug = mu_gray(x, p);
  const double ub = mu_bright(x, p);
  const double support = ud + ug + ub;
  if (support <= 0.0) {
    throw Error(ErrorCode::EmptySupport, "no membership fires at intensity " + std::to_string(x));
  }
  return (p.v_dark * ud + p.v_gray * ug + p.v_bright * ub) / support;
}

FuzzyClass classify(double x, const FuzzyParams& p, ClassifyOn on) {
  const double f = on == ClassifyOn::Raw ? x : defuzzify(x, p);
  if (f < p.lower_cut) return FuzzyClass::Black;
  if (f > p.upper_cut) return FuzzyClass::White;
  return FuzzyClass::Ambiguous;
}

FuzzyParams apply_sliders(double shift_gray, double span_gray, const FuzzyParams& base) {
  if (!(span_gray > 0.0)) invalid("span gray must be positive");
  FuzzyParams p = base;
  p.b = shift_gray;
  p.a = shift_gray - span_gray;
  p.c = shift_gray + span_gray;
  p.alpha = shift_gray;
  p.beta = shift_gray;
  if (p.a < 0.0) invalid("span gray pushes a below 0 (a=" + std::to_string(p.a) + ")");
  if (p.c > 255.0) invalid("span gray pushes c above 255 (c=" + std::to_string(p.c) + ")");
  p.validate();
  return p;
}

}  // namespace bfseg
