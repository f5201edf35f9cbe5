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
#include <string_view>

namespace bfseg {

/// Breakpoints, output levels and classification cuts of the three-term
/// intensity fuzzy system. All values are in 8-bit intensity units.
struct FuzzyParams {
  double a = 80.0;       // dark shoulder end, gray foot
  double b = 110.0;      // gray peak
  double c = 140.0;      // bright shoulder start, gray foot
  double alpha = 110.0;  // dark ramp reaches zero
  double beta = 110.0;   // bright ramp leaves zero
  double v_dark = 0.0;
  double v_gray = 127.0;
  double v_bright = 255.0;
  double lower_cut = 80.0;
  double upper_cut = 140.0;

  void validate() const;
  bool operator==(const FuzzyParams&) const = default;
};

enum class FuzzyClass { Black, White, Ambiguous };

/// Which value is compared against the cuts: the defuzzified output (default)
/// or the raw pixel intensity.
enum class ClassifyOn { Defuzzified, Raw };

std::string_view to_string(FuzzyClass c);
std::string_view to_string(ClassifyOn c);
ClassifyOn classify_on_from_string(std::string_view s);

double mu_dark(double x, const FuzzyParams& p);
double mu_gray(double x, const FuzzyParams& p);
double mu_bright(double x, const FuzzyParams& p);

/// Weighted average of the output levels by membership. Throws EmptySupport
/// when all three memberships vanish.
double defuzzify(double x, const FuzzyParams& p);

FuzzyClass classify(double x, const FuzzyParams& p, ClassifyOn on = ClassifyOn::Defuzzified);

/// Shift Gray moves the peak b; Span Gray sets the symmetric distance from b to
/// both feet. The ramps alpha and beta follow b. Output levels and cuts are kept.
FuzzyParams apply_sliders(double shift_gray, double span_gray, const FuzzyParams& base = {});

}  // namespace bfseg
