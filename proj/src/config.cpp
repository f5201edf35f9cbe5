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

#include "bfseg/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace bfseg {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorCode::InvalidParams, msg); }

std::string range_text(double lo, double hi) {
  std::ostringstream os;
  os << "[" << lo << ", " << hi << "]";
  return os.str();
}

}  // namespace

double shift_gray(const FuzzyParams& p) { return p.b; }
double span_gray(const FuzzyParams& p) { return p.b - p.a; }

double parse_decimal(const json& value, const std::string& key, double lo, double hi) {
  double v = 0;
  if (value.is_number()) {
    v = value.get<double>();
  } else if (value.is_string()) {
    const std::string s = value.get<std::string>();
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
      invalid(key + ": '" + s + "' is not a decimal number");
    }
  } else {
    invalid(key + ": expected a number or decimal string");
  }
  if (!std::isfinite(v) || v < lo || v > hi) {
    std::ostringstream os;
    os << key << ": " << v << " is outside " << range_text(lo, hi);
    invalid(os.str());
  }
  return v;
}

namespace {

std::string string_param(const json& value, const std::string& key) {
  if (!value.is_string()) invalid(key + ": expected a string");
  return value.get<std::string>();
}

VariogramDistance distance_from_string(const std::string& s) {
  if (s == "sequence") return VariogramDistance::SequenceIndex;
  if (s == "euclidean") return VariogramDistance::Euclidean2D;
  invalid("variogram_distance must be 'sequence' or 'euclidean'");
}

const char* to_string(VariogramDistance d) {
  return d == VariogramDistance::SequenceIndex ? "sequence" : "euclidean";
}

}  // namespace

SegmentationConfig apply_param_updates(const SegmentationConfig& cfg, const json& body) {
  if (!body.is_object()) invalid("parameter update must be a JSON object");
  SegmentationConfig next = cfg;

  if (auto it = body.find("fuzzy"); it != body.end()) {
    if (!it->is_object()) invalid("fuzzy: expected an object");
    const std::pair<const char*, double FuzzyParams::*> fields[] = {
        {"a", &FuzzyParams::a},
        {"b", &FuzzyParams::b},
        {"c", &FuzzyParams::c},
        {"alpha", &FuzzyParams::alpha},
        {"beta", &FuzzyParams::beta},
        {"v_dark", &FuzzyParams::v_dark},
        {"v_gray", &FuzzyParams::v_gray},
        {"v_bright", &FuzzyParams::v_bright},
        {"lower_cut", &FuzzyParams::lower_cut},
        {"upper_cut", &FuzzyParams::upper_cut},
    };
    for (auto f = it->begin(); f != it->end(); ++f) {
      bool known = false;
      for (const auto& [name, member] : fields) {
        if (f.key() == name) {
          next.fuzzy.*member = parse_decimal(f.value(), std::string("fuzzy.") + name, 0.0, 255.0);
          known = true;
        }
      }
      if (!known) invalid("fuzzy: unknown key '" + f.key() + "'");
    }
  }

  const bool has_shift = body.contains("shift_gray");
  const bool has_span = body.contains("span_gray");
  if (has_shift || has_span) {
    const double shift = has_shift ? parse_decimal(body["shift_gray"], "shift_gray", 0, 255) : shift_gray(next.fuzzy);
    const double span = has_span ? parse_decimal(body["span_gray"], "span_gray", 1, 255) : span_gray(next.fuzzy);
    next.fuzzy = apply_sliders(shift, span, next.fuzzy);
  }

  for (auto it = body.begin(); it != body.end(); ++it) {
    const std::string& key = it.key();
    const json& v = it.value();
    if (key == "fuzzy" || key == "shift_gray" || key == "span_gray") continue;
    if (key == "lb") next.thresholds.lb = parse_decimal(v, key, 0, 255);
    else if (key == "nav") next.thresholds.nav = parse_decimal(v, key, 0, 10);
    else if (key == "randomness") next.thresholds.randomness = parse_decimal(v, key, -1, 1);
    else if (key == "green_cut") next.green_cut = parse_decimal(v, key, 0, 255);
    else if (key == "patch_size") {
      const double n = parse_decimal(v, key, 3, 11);
      if (n != std::floor(n) || !valid_patch_size(static_cast<int>(n))) invalid("patch_size must be odd in [3, 11]");
      next.thresholds.patch_size = static_cast<int>(n);
    } else if (key == "classify_on") next.classify_on = classify_on_from_string(string_param(v, key));
    else if (key == "variogram_distance") next.variogram_distance = distance_from_string(string_param(v, key));
    else invalid("unknown parameter '" + key + "'");
  }
  next.validate();
  return next;
}

json to_json(const SegmentationConfig& cfg) {
  const FuzzyParams& f = cfg.fuzzy;
  return json{
      {"shift_gray", shift_gray(f)},
      {"span_gray", span_gray(f)},
      {"fuzzy",
       {{"a", f.a},
        {"b", f.b},
        {"c", f.c},
        {"alpha", f.alpha},
        {"beta", f.beta},
        {"v_dark", f.v_dark},
        {"v_gray", f.v_gray},
        {"v_bright", f.v_bright},
        {"lower_cut", f.lower_cut},
        {"upper_cut", f.upper_cut}}},
      {"lb", cfg.thresholds.lb},
      {"nav", cfg.thresholds.nav},
      {"randomness", cfg.thresholds.randomness},
      {"patch_size", cfg.thresholds.patch_size},
      {"green_cut", cfg.green_cut},
      {"classify_on", std::string(to_string(cfg.classify_on))},
      {"variogram_distance", to_string(cfg.variogram_distance)},
  };
}

json to_json(const DenoiseStep& step) {
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, FillBelowArea>) {
          return {{"type", "fill_below_area"}, {"max_area", s.max_area}};
        } else if constexpr (std::is_same_v<T, Erode>) {
          return {{"type", "erode"}, {"kernel", s.kernel}};
        } else if constexpr (std::is_same_v<T, MedianBlur>) {
          return {{"type", "median_blur"}, {"kernel", s.kernel}};
        } else {
          return {{"type", "circularity_filter"},
                  {"area_min", s.area_min},
                  {"area_max", s.area_max},
                  {"circ_min", s.circ_min},
                  {"circ_max", s.circ_max},
                  {"mode", s.mode == FilterMode::Remove ? "remove" : "keep"}};
        }
      },
      step);
}

json to_json(const DenoiseProfile& profile) {
  json steps = json::array();
  for (const auto& s : profile.steps) steps.push_back(to_json(s));
  return {{"name", profile.name}, {"lb", profile.lb}, {"steps", steps}};
}

DenoiseStep step_from_json(const json& j) {
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) {
    invalid("each step needs a string 'type'");
  }
  // Reuse the text parser so both encodings accept exactly the same steps.
  std::string line = j["type"].get<std::string>();
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() == "type") continue;
    std::string value;
    if (it->is_string()) value = it->get<std::string>();
    else if (it->is_number()) value = it->dump();
    else invalid("step field '" + it.key() + "' must be a number or string");
    line += " " + it.key() + "=" + value;
  }
  return parse_step(line);
}

DenoiseProfile profile_from_json(const json& j, const DenoiseProfile& current) {
  if (!j.is_object()) invalid("profile must be a JSON object");
  if (j.contains("preset")) {
    if (!j["preset"].is_string()) invalid("preset must be a string");
    auto p = builtin_profile(j["preset"].get<std::string>());
    if (!p) invalid("unknown preset '" + j["preset"].get<std::string>() + "'");
    return *p;
  }
  if (!j.contains("steps") || !j["steps"].is_array()) invalid("profile needs a 'steps' array or a 'preset'");
  DenoiseProfile p = current;
  p.steps.clear();
  for (const auto& s : j["steps"]) p.steps.push_back(step_from_json(s));
  if (j.contains("name") && j["name"].is_string()) p.name = j["name"].get<std::string>();
  else p.name = "custom";
  return p;
}

RunConfig run_config_from_json(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) invalid("run config must be a JSON object");
  RunConfig rc;
  json rest = j;
  if (j.contains("profile")) {
    if (!j["profile"].is_string()) invalid("profile must be a builtin name or a path");
    const std::string ref = j["profile"].get<std::string>();
    if (auto p = builtin_profile(ref)) {
      rc.profile = *p;
    } else {
      std::filesystem::path path(ref);
      if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
      rc.profile = load_profile(path);
    }
    rest.erase("profile");
  }
  rc.segmentation.thresholds.lb = rc.profile.lb;
  rc.segmentation = apply_param_updates(rc.segmentation, rest);
  return rc;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::NotFound, path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    invalid(path.string() + ": " + e.what());
  }
  return run_config_from_json(j, path.parent_path());
}

namespace {

std::string fnv1a_hex(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

}  // namespace

std::string config_hash(const SegmentationConfig& cfg) { return fnv1a_hex(to_json(cfg).dump()); }

std::string config_hash(const SegmentationConfig& cfg, const DenoiseProfile& profile) {
  json steps = json::array();
  for (const auto& s : profile.steps) steps.push_back(to_json(s));
  return fnv1a_hex(json{{"segmentation", to_json(cfg)}, {"steps", steps}}.dump());
}

}  // namespace bfseg
