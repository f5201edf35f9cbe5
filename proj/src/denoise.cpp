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

#include "bfseg/denoise.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

namespace bfseg {

namespace {

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorCode::InvalidParams, msg); }

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_kernel(int k, const char* what) {
  if (k < 3 || k % 2 == 0) invalid(std::string(what) + " kernel must be odd and >= 3");
}

/// Foreground counts over kernel x kernel windows with replicate padding.
Eigen::MatrixXi window_counts(const BinaryMask& mask, int kernel) {
  const Eigen::Index h = mask.height();
  const Eigen::Index w = mask.width();
  const Eigen::Index r = kernel / 2;
  // Integral image of the replicate-padded mask.
  Eigen::MatrixXi sat = Eigen::MatrixXi::Zero(h + 2 * r + 1, w + 2 * r + 1);
  for (Eigen::Index y = 0; y < h + 2 * r; ++y) {
    const Eigen::Index sy = std::clamp<Eigen::Index>(y - r, 0, h - 1);
    int row = 0;
    for (Eigen::Index x = 0; x < w + 2 * r; ++x) {
      const Eigen::Index sx = std::clamp<Eigen::Index>(x - r, 0, w - 1);
      row += mask.at(sx, sy) ? 1 : 0;
      sat(y + 1, x + 1) = sat(y, x + 1) + row;
    }
  }
  Eigen::MatrixXi counts(h, w);
  for (Eigen::Index y = 0; y < h; ++y) {
    for (Eigen::Index x = 0; x < w; ++x) {
      counts(y, x) = sat(y + kernel, x + kernel) - sat(y, x + kernel) - sat(y + kernel, x) + sat(y, x);
    }
  }
  return counts;
}

/// Labels connected pixels whose mask value equals `value`. Returns the label
/// plane (-1 for other pixels) and pixel lists per label.
std::vector<std::vector<Eigen::Index>> label(const BinaryMask& mask, bool value, bool eight) {
  const Eigen::Index h = mask.height();
  const Eigen::Index w = mask.width();
  std::vector<char> seen(static_cast<size_t>(h * w), 0);
  std::vector<std::vector<Eigen::Index>> comps;
  std::vector<Eigen::Index> stack;
  for (Eigen::Index start = 0; start < h * w; ++start) {
    if (seen[start] || mask.at(start % w, start / w) != value) continue;
    comps.emplace_back();
    auto& comp = comps.back();
    seen[start] = 1;
    stack.push_back(start);
    while (!stack.empty()) {
      const Eigen::Index p = stack.back();
      stack.pop_back();
      comp.push_back(p);
      const Eigen::Index px = p % w;
      const Eigen::Index py = p / w;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if ((dx == 0 && dy == 0) || (!eight && dx != 0 && dy != 0)) continue;
          const Eigen::Index nx = px + dx;
          const Eigen::Index ny = py + dy;
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          const Eigen::Index q = ny * w + nx;
          if (seen[q] || mask.at(nx, ny) != value) continue;
          seen[q] = 1;
          stack.push_back(q);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
  }
  return comps;
}

}  // namespace

void validate(const DenoiseStep& step) {
  std::visit(overloaded{
                 [](const FillBelowArea& s) {
                   if (s.max_area < 0) invalid("fill_below_area: max_area must be >= 0");
                 },
                 [](const Erode& s) { check_kernel(s.kernel, "erode"); },
                 [](const MedianBlur& s) { check_kernel(s.kernel, "median_blur"); },
                 [](const CircularityFilter& s) {
                   if (!(s.area_min >= 0 && s.area_min <= s.area_max)) {
                     invalid("circularity_filter: need 0 <= area_min <= area_max");
                   }
                   if (!(s.circ_min >= 0.0 && s.circ_min <= s.circ_max && s.circ_max <= 1.0)) {
                     invalid("circularity_filter: need 0 <= circ_min <= circ_max <= 1");
                   }
                 },
             },
             step);
}

std::vector<Component> connected_components(const BinaryMask& mask) {
  const Eigen::Index w = mask.width();
  const Eigen::Index h = mask.height();
  std::vector<Component> out;
  for (auto& pixels : label(mask, true, true)) {
    Component c;
    c.area = static_cast<Eigen::Index>(pixels.size());
    for (Eigen::Index p : pixels) {
      const Eigen::Index x = p % w;
      const Eigen::Index y = p / w;
      const bool boundary = x == 0 || y == 0 || x == w - 1 || y == h - 1 || !mask.at(x - 1, y) ||
                            !mask.at(x + 1, y) || !mask.at(x, y - 1) || !mask.at(x, y + 1);
      if (boundary) ++c.perimeter;
    }
    const double per = static_cast<double>(c.perimeter);
    c.circularity = std::min(1.0, 4.0 * std::numbers::pi * static_cast<double>(c.area) / (per * per));
    c.pixels = std::move(pixels);
    out.push_back(std::move(c));
  }
  return out;
}

BinaryMask fill_below_area(const BinaryMask& mask, long max_area) {
  const Eigen::Index w = mask.width();
  const Eigen::Index h = mask.height();
  BinaryMask out = mask;
  for (const auto& hole : label(mask, false, false)) {
    if (static_cast<long>(hole.size()) >= max_area) continue;
    const bool touches_border = std::any_of(hole.begin(), hole.end(), [&](Eigen::Index p) {
      const Eigen::Index x = p % w;
      const Eigen::Index y = p / w;
      return x == 0 || y == 0 || x == w - 1 || y == h - 1;
    });
    if (touches_border) continue;
    for (Eigen::Index p : hole) out.set(p % w, p / w, true);
  }
  return out;
}

BinaryMask erode(const BinaryMask& mask, int kernel) {
  check_kernel(kernel, "erode");
  const Eigen::MatrixXi counts = window_counts(mask, kernel);
  const int full = kernel * kernel;
  Plane8 out = (counts.array() == full).select(Plane8::Constant(mask.height(), mask.width(), kForeground),
                                               Plane8::Zero(mask.height(), mask.width()));
  return BinaryMask(std::move(out));
}

BinaryMask median_blur(const BinaryMask& mask, int kernel) {
  check_kernel(kernel, "median_blur");
  const Eigen::MatrixXi counts = window_counts(mask, kernel);
  const int half = kernel * kernel / 2;
  Plane8 out = (counts.array() > half).select(Plane8::Constant(mask.height(), mask.width(), kForeground),
                                              Plane8::Zero(mask.height(), mask.width()));
  return BinaryMask(std::move(out));
}

BinaryMask circularity_filter(const BinaryMask& mask, const CircularityFilter& step) {
  validate(step);
  const Eigen::Index w = mask.width();
  BinaryMask out(mask.width(), mask.height());
  for (const auto& c : connected_components(mask)) {
    const double area = static_cast<double>(c.area);
    const bool matches = area >= step.area_min && area <= step.area_max && c.circularity >= step.circ_min &&
                         c.circularity <= step.circ_max;
    const bool keep = step.mode == FilterMode::Remove ? !matches : matches;
    if (!keep) continue;
    for (Eigen::Index p : c.pixels) out.set(p % w, p / w, true);
  }
  return out;
}

BinaryMask apply_step(const BinaryMask& mask, const DenoiseStep& step) {
  validate(step);
  return std::visit(overloaded{
                        [&](const FillBelowArea& s) { return fill_below_area(mask, s.max_area); },
                        [&](const Erode& s) { return erode(mask, s.kernel); },
                        [&](const CircularityFilter& s) { return circularity_filter(mask, s); },
                        [&](const MedianBlur& s) { return median_blur(mask, s.kernel); },
                    },
                    step);
}

BinaryMask apply_profile(const BinaryMask& mask, const DenoiseProfile& profile) {
  BinaryMask out = mask;
  for (const auto& step : profile.steps) out = apply_step(out, step);
  return out;
}

DenoiseProfile profile1() {
  return {"Profile-1", 4.23,
          {FillBelowArea{100}, Erode{3}, CircularityFilter{0, 71, 0.0, 1.0, FilterMode::Remove}, MedianBlur{5}}};
}

DenoiseProfile profile2() {
  DenoiseProfile p = profile1();
  p.name = "Profile-2";
  p.lb = 2.71;
  return p;
}

DenoiseProfile profile_d1() {
  return {"Profile-D1",
          4.23,
          {FillBelowArea{100}, Erode{3}, CircularityFilter{5, 293, 0.0, 1.0, FilterMode::Remove},
           CircularityFilter{253, 1800, 0.0, 0.31, FilterMode::Remove}, MedianBlur{5}}};
}

namespace {

std::string normalise_name(std::string_view name) {
  std::string out;
  for (char c : name) {
    if (std::isalnum(static_cast<unsigned char>(c))) out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_number(std::string_view key, std::string_view text) {
  double v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
    invalid("bad number for '" + std::string(key) + "': '" + std::string(text) + "'");
  }
  return v;
}

int parse_int(std::string_view key, std::string_view text) {
  const double v = parse_number(key, text);
  if (v != std::floor(v)) invalid("'" + std::string(key) + "' must be an integer");
  return static_cast<int>(v);
}

// Shortest text that parses back to the same double.
std::string fmt(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace

std::optional<DenoiseProfile> builtin_profile(std::string_view name) {
  const std::string n = normalise_name(name);
  if (n == "profile1" || n == "p1") return profile1();
  if (n == "profile2" || n == "p2") return profile2();
  if (n == "profiled1" || n == "d1") return profile_d1();
  return std::nullopt;
}

DenoiseStep parse_step(std::string_view line) {
  std::istringstream in{std::string(line)};
  std::string kind;
  in >> kind;
  std::map<std::string, std::string> args;
  for (std::string tok; in >> tok;) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) invalid("step argument '" + tok + "' is not key=value");
    args[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  auto take = [&](const std::string& key) -> std::string {
    auto it = args.find(key);
    if (it == args.end()) invalid(kind + ": missing '" + key + "'");
    std::string v = it->second;
    args.erase(it);
    return v;
  };
  DenoiseStep step;
  if (kind == "fill_below_area") {
    step = FillBelowArea{parse_int("max_area", take("max_area"))};
  } else if (kind == "erode") {
    step = Erode{parse_int("kernel", take("kernel"))};
  } else if (kind == "median_blur") {
    step = MedianBlur{parse_int("kernel", take("kernel"))};
  } else if (kind == "circularity_filter") {
    CircularityFilter f;
    f.area_min = parse_number("area_min", take("area_min"));
    f.area_max = parse_number("area_max", take("area_max"));
    f.circ_min = parse_number("circ_min", take("circ_min"));
    f.circ_max = parse_number("circ_max", take("circ_max"));
    const std::string mode = take("mode");
    if (mode == "remove") f.mode = FilterMode::Remove;
    else if (mode == "keep") f.mode = FilterMode::Keep;
    else invalid("circularity_filter: mode must be 'remove' or 'keep'");
    step = f;
  } else {
    invalid("unknown denoise step '" + kind + "'");
  }
  if (!args.empty()) invalid(kind + ": unexpected argument '" + args.begin()->first + "'");
  validate(step);
  return step;
}

std::string format_step(const DenoiseStep& step) {
  return std::visit(
      overloaded{
          [](const FillBelowArea& s) { return "fill_below_area max_area=" + std::to_string(s.max_area); },
          [](const Erode& s) { return "erode kernel=" + std::to_string(s.kernel); },
          [](const MedianBlur& s) { return "median_blur kernel=" + std::to_string(s.kernel); },
          [](const CircularityFilter& s) {
            return "circularity_filter area_min=" + fmt(s.area_min) + " area_max=" + fmt(s.area_max) +
                   " circ_min=" + fmt(s.circ_min) + " circ_max=" + fmt(s.circ_max) +
                   " mode=" + (s.mode == FilterMode::Remove ? "remove" : "keep");
          },
      },
      step);
}

DenoiseProfile parse_profile(std::string_view text) {
  DenoiseProfile p;
  bool have_name = false;
  bool have_lb = false;
  std::istringstream in{std::string(text)};
  int lineno = 0;
  for (std::string raw; std::getline(in, raw);) {
    ++lineno;
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) invalid("profile line " + std::to_string(lineno) + ": expected key = value");
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    if (key == "name") {
      p.name = std::string(value);
      have_name = true;
    } else if (key == "lb") {
      p.lb = parse_number("lb", value);
      if (p.lb < 0) invalid("lb must be >= 0");
      have_lb = true;
    } else if (key == "step") {
      p.steps.push_back(parse_step(value));
    } else {
      invalid("profile line " + std::to_string(lineno) + ": unknown key '" + std::string(key) + "'");
    }
  }
  if (!have_name) invalid("profile is missing 'name'");
  if (!have_lb) invalid("profile is missing 'lb'");
  if (p.steps.empty()) invalid("profile has no steps");
  return p;
}

std::string format_profile(const DenoiseProfile& profile) {
  std::string out = "name = " + profile.name + "\nlb = " + fmt(profile.lb) + "\n";
  for (const auto& s : profile.steps) out += "step = " + format_step(s) + "\n";
  return out;
}

DenoiseProfile load_profile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::NotFound, path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_profile(ss.str());
}

void save_profile(const DenoiseProfile& profile, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  out << format_profile(profile);
}

DenoiseProfile resolve_profile(std::string_view name_or_path) {
  if (auto p = builtin_profile(name_or_path)) return *p;
  return load_profile(std::filesystem::path(name_or_path));
}

}  // namespace bfseg
