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

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "bfseg/config.hpp"
#include "bfseg/csv.hpp"
#include "bfseg/denoise.hpp"
#include "bfseg/image_io.hpp"
#include "bfseg/metrics.hpp"
#include "bfseg/segmentation.hpp"
#include "bfseg/service.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace bfseg;

namespace {

/// Parameter flags shared by segment and batch. Unset flags leave the profile
/// and config file values in place.
struct ParamFlags {
  std::string profile = "profile1";
  std::string config;
  std::optional<std::string> lb, nav, randomness, shift_gray, span_gray, green_cut, patch_size, classify_on;

  void add_to(CLI::App& app) {
    app.add_option("--profile", profile, "Builtin profile (profile1, profile2, profile_d1) or profile file");
    app.add_option("--config", config, "Run config JSON; its profile and parameters apply before flags");
    app.add_option("--lb", lb, "SSDLM lower bound; overrides the profile lb");
    app.add_option("--nav", nav, "NAV threshold [0, 10]");
    app.add_option("--randomness", randomness, "Moran's I randomness threshold [-1, 1]");
    app.add_option("--shift-gray", shift_gray, "Gray membership peak b");
    app.add_option("--span-gray", span_gray, "Distance from b to the gray feet a and c");
    app.add_option("--green-cut", green_cut, "Green intensity cut of the channel rule");
    app.add_option("--patch-size", patch_size, "Odd neighbourhood size in [3, 11]");
    app.add_option("--classify-on", classify_on, "defuzzified (default) or raw");
  }

  RunConfig resolve() const {
    RunConfig rc;
    if (!config.empty()) {
      rc = load_run_config(config);
    } else {
      rc.profile = resolve_profile(profile);
      rc.segmentation.thresholds.lb = rc.profile.lb;
    }
    json updates = json::object();
    auto put = [&](const char* key, const std::optional<std::string>& v) {
      if (v) updates[key] = *v;
    };
    put("lb", lb);
    put("nav", nav);
    put("randomness", randomness);
    put("shift_gray", shift_gray);
    put("span_gray", span_gray);
    put("green_cut", green_cut);
    put("patch_size", patch_size);
    put("classify_on", classify_on);
    rc.segmentation = apply_param_updates(rc.segmentation, updates);
    return rc;
  }
};

bool is_raster(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".tif" || ext == ".tiff" || ext == ".bmp";
}

std::vector<fs::path> list_rasters(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::NotFound, dir.string() + " is not a directory");
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && is_raster(e.path())) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// --- segment ---------------------------------------------------------------

struct SegmentArgs {
  std::string input, output, uncertainty, provenance, raw_mask;
  bool no_denoise = false;
  int threads = 1;
  ParamFlags params;
};

int run_segment(const SegmentArgs& a) {
  const RunConfig rc = a.params.resolve();
  const RasterImage img = load_image(a.input);
  const SegmentationResult res = segment(img, rc.segmentation, SegmentOptions{a.threads});
  const BinaryMask final_mask = a.no_denoise ? res.mask : apply_profile(res.mask, rc.profile);
  save_mask(final_mask, a.output);
  if (!a.raw_mask.empty()) save_mask(res.mask, a.raw_mask);
  if (!a.uncertainty.empty()) {
    write_bytes(encode_png(render_uncertainty(to_gray_average(img), res.uncertainty)), a.uncertainty);
  }
  if (!a.provenance.empty()) write_bytes(encode_png(res.provenance), a.provenance);
  std::cout << "wrote " << a.output << " (" << final_mask.count() << " foreground pixels, config "
            << config_hash(rc.segmentation, rc.profile) << ")\n";
  return 0;
}

// --- batch -----------------------------------------------------------------

struct BatchArgs {
  std::string input_dir, output_dir;
  int parallelism = 1;
  ParamFlags params;
};

int run_batch(const BatchArgs& a) {
  const RunConfig rc = a.params.resolve();
  const auto inputs = list_rasters(a.input_dir);
  fs::create_directories(a.output_dir);

  struct Outcome {
    double seconds = 0;
    std::string error;
  };
  std::vector<Outcome> outcomes(inputs.size());
  std::atomic<std::size_t> next{0};
  const auto t0 = std::chrono::steady_clock::now();
  auto work = [&] {
    for (std::size_t i = next++; i < inputs.size(); i = next++) {
      const auto ti = std::chrono::steady_clock::now();
      try {
        const RasterImage img = load_image(inputs[i]);
        const auto res = segment(img, rc.segmentation);
        save_mask(apply_profile(res.mask, rc.profile), fs::path(a.output_dir) / (inputs[i].stem().string() + ".png"));
      } catch (const std::exception& e) {
        outcomes[i].error = e.what();
      }
      outcomes[i].seconds = seconds_since(ti);
    }
  };
  {
    std::vector<std::jthread> pool;
    const int workers = std::max(1, std::min<int>(a.parallelism, static_cast<int>(std::max<std::size_t>(inputs.size(), 1))));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  const double wall = seconds_since(t0);

  std::ofstream timings(fs::path(a.output_dir) / "timings.csv");
  timings << "image,seconds,status\n";
  std::size_t failed = 0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    timings << csv::escape(inputs[i].filename().string()) << ',' << outcomes[i].seconds << ','
            << (outcomes[i].error.empty() ? "ok" : csv::escape(outcomes[i].error)) << '\n';
    if (!outcomes[i].error.empty()) {
      ++failed;
      std::cerr << "failed: " << inputs[i] << ": " << outcomes[i].error << '\n';
    }
  }
  std::cout << (inputs.size() - failed) << " processed, " << failed << " failed, wall " << std::fixed
            << std::setprecision(3) << wall << " s\n";
  return failed == 0 ? 0 : 1;
}

// --- calibrate -------------------------------------------------------------

struct CalibrateArgs {
  std::string dir, regions, write_profile, base_profile = "profile1";
  int patch_size = 5;
  int stride = 0;
  bool whole_crop = false;
};

std::vector<double> calibration_samples(const CalibrateArgs& a) {
  if (!valid_patch_size(a.patch_size)) throw Error(ErrorCode::InvalidParams, "patch size must be odd in [3, 11]");
  std::vector<double> samples;
  const int n = a.patch_size;
  if (!a.dir.empty()) {
    const int stride = a.stride > 0 ? a.stride : n;
    for (const auto& path : list_rasters(a.dir)) {
      const GrayImage gray = to_gray_average(load_image(path));
      if (a.whole_crop) {
        samples.push_back(ssdlm(gray.pixels.cast<double>()));
        continue;
      }
      // Non-overlapping patches that fit entirely inside the crop.
      for (Eigen::Index y = 0; y + n <= gray.height(); y += stride) {
        for (Eigen::Index x = 0; x + n <= gray.width(); x += stride) {
          samples.push_back(ssdlm(extract_patch<double>(gray.pixels, x + n / 2, y + n / 2, n)));
        }
      }
    }
  }
  if (!a.regions.empty()) {
    std::ifstream in(a.regions);
    if (!in) throw Error(ErrorCode::NotFound, a.regions);
    const auto rows = csv::read(in);
    if (rows.empty()) throw Error(ErrorCode::InsufficientSamples, "empty region file");
    const int ci = csv::column(rows[0], "image"), cx = csv::column(rows[0], "x"), cy = csv::column(rows[0], "y");
    if (ci < 0 || cx < 0 || cy < 0) throw Error(ErrorCode::CorruptData, "region file needs image,x,y columns");
    std::map<fs::path, GrayImage> cache;
    const fs::path base = fs::path(a.regions).parent_path();
    for (std::size_t i = 1; i < rows.size(); ++i) {
      fs::path img_path = rows[i].at(ci);
      if (img_path.is_relative()) img_path = base / img_path;
      auto it = cache.find(img_path);
      if (it == cache.end()) it = cache.emplace(img_path, to_gray_average(load_image(img_path))).first;
      const long x = std::stol(rows[i].at(cx));
      const long y = std::stol(rows[i].at(cy));
      samples.push_back(ssdlm(extract_patch<double>(it->second.pixels, x, y, n)));
    }
  }
  return samples;
}

int run_calibrate(const CalibrateArgs& a) {
  const auto samples = calibration_samples(a);
  const double lb = calibrate_lb(samples);
  std::cout << "samples = " << samples.size() << "\n";
  std::cout << "lb = " << std::setprecision(12) << lb << "\n";
  if (!a.write_profile.empty()) {
    DenoiseProfile p = resolve_profile(a.base_profile);
    p.lb = lb;
    save_profile(p, a.write_profile);
    std::cout << "wrote " << a.write_profile << "\n";
  }
  return 0;
}

// --- eval ------------------------------------------------------------------

struct EvalArgs {
  std::string pred, truth, groups, rows, ratings, out_dir = ".", overlays, wilcoxon;
  bool boundary_hausdorff = false;
};

std::map<std::string, std::string> read_groups(const std::string& path) {
  std::map<std::string, std::string> out;
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::NotFound, path);
  const auto rows = csv::read(in);
  if (rows.empty()) return out;
  const int ci = csv::column(rows[0], "image"), cg = csv::column(rows[0], "group");
  if (ci < 0 || cg < 0) throw Error(ErrorCode::CorruptData, "groups file needs image,group columns");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const fs::path img = rows[i].at(ci);
    out[img.stem().string()] = rows[i].at(cg);
  }
  return out;
}

std::vector<MetricRecord> evaluate_dirs(const EvalArgs& a, int& unmatched) {
  std::map<std::string, fs::path> truths;
  for (const auto& p : list_rasters(a.truth)) truths[p.stem().string()] = p;
  const auto groups = a.groups.empty() ? std::map<std::string, std::string>{} : read_groups(a.groups);
  if (!a.overlays.empty()) fs::create_directories(a.overlays);

  std::vector<MetricRecord> records;
  for (const auto& p : list_rasters(a.pred)) {
    const std::string stem = p.stem().string();
    auto t = truths.find(stem);
    if (t == truths.end()) {
      std::cerr << "unmatched prediction: " << p.filename().string() << '\n';
      ++unmatched;
      continue;
    }
    const BinaryMask pred = load_mask(p);
    const BinaryMask truth = load_mask(t->second);
    truths.erase(t);
    MetricRecord rec;
    rec.image = stem;
    auto g = groups.find(stem);
    rec.group = g != groups.end() ? g->second : "all";
    rec.report = pixel_metrics(confusion(pred, truth));
    if (pred.width() >= 11 && pred.height() >= 11) {
      rec.report.ssim = ssim(GrayImage(pred.pixels), GrayImage(truth.pixels));
    }
    if (!pred.empty() && !truth.empty()) {
      rec.report.hausdorff =
          hausdorff(pred, truth, a.boundary_hausdorff ? HausdorffMode::Boundary : HausdorffMode::Foreground);
    }
    if (!a.overlays.empty()) {
      write_bytes(encode_png(render_comparison(pred, truth)), fs::path(a.overlays) / (stem + ".png"));
    }
    records.push_back(std::move(rec));
  }
  for (const auto& [stem, path] : truths) {
    std::cerr << "unmatched truth: " << path.filename().string() << '\n';
    ++unmatched;
  }
  return records;
}

void print_wilcoxon(const std::vector<MetricRecord>& records, const std::string& pair) {
  const auto colon = pair.find(':');
  if (colon == std::string::npos) throw Error(ErrorCode::InvalidParams, "--wilcoxon expects GROUP_A:GROUP_B");
  const std::string ga = pair.substr(0, colon), gb = pair.substr(colon + 1);
  std::map<std::string, const MetricReport*> a, b;
  for (const auto& r : records) {
    if (r.group == ga) a[r.image] = &r.report;
    if (r.group == gb) b[r.image] = &r.report;
  }
  for (std::size_t m = 0; m < kMetricNames.size(); ++m) {
    std::vector<double> xs, ys;
    for (const auto& [img, ra] : a) {
      auto it = b.find(img);
      if (it == b.end()) continue;
      const double x = metric_value(*ra, m), y = metric_value(*it->second, m);
      if (std::isnan(x) || std::isnan(y)) continue;
      xs.push_back(x);
      ys.push_back(y);
    }
    if (xs.empty()) continue;
    try {
      const auto w = wilcoxon_signed_rank(xs, ys);
      std::cout << "wilcoxon " << ga << " vs " << gb << " " << kMetricNames[m] << ": n=" << w.n
                << " W+=" << w.w_plus << " W-=" << w.w_minus << " p=" << std::setprecision(6) << w.p_value
                << (w.exact ? " (exact)" : " (normal approx)") << '\n';
    } catch (const Error& e) {
      std::cout << "wilcoxon " << ga << " vs " << gb << " " << kMetricNames[m] << ": " << e.what() << '\n';
    }
  }
}

void print_kappa(const std::string& path, const fs::path& out_dir) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::NotFound, path);
  const auto rows = csv::read(in);
  if (rows.size() < 2 || rows[0].size() < 3) {
    throw Error(ErrorCode::InsufficientSamples, "ratings file needs an image column and at least two raters");
  }
  const int ci = csv::column(rows[0], "image");
  std::vector<int> raters;
  for (int c = 0; c < static_cast<int>(rows[0].size()); ++c)
    if (c != ci) raters.push_back(c);
  std::ofstream out(out_dir / "kappa.csv");
  out << "rater_a,rater_b,kappa\n";
  for (std::size_t i = 0; i < raters.size(); ++i) {
    for (std::size_t j = i + 1; j < raters.size(); ++j) {
      std::vector<std::string> r1, r2;
      for (std::size_t k = 1; k < rows.size(); ++k) {
        r1.push_back(rows[k].at(raters[i]));
        r2.push_back(rows[k].at(raters[j]));
      }
      const std::string na = rows[0][raters[i]], nb = rows[0][raters[j]];
      try {
        const double kappa = cohens_kappa(r1, r2);
        std::cout << "kappa " << na << " vs " << nb << ": " << std::setprecision(6) << kappa << '\n';
        out << csv::escape(na) << ',' << csv::escape(nb) << ',' << kappa << '\n';
      } catch (const Error& e) {
        std::cout << "kappa " << na << " vs " << nb << ": " << e.what() << '\n';
        out << csv::escape(na) << ',' << csv::escape(nb) << ",\n";
      }
    }
  }
}

int run_eval(const EvalArgs& a) {
  fs::create_directories(a.out_dir);
  int unmatched = 0;
  std::vector<MetricRecord> records;
  if (!a.rows.empty()) {
    std::ifstream in(a.rows);
    if (!in) throw Error(ErrorCode::NotFound, a.rows);
    records = read_records_csv(in);
  } else if (!a.pred.empty() || !a.truth.empty()) {
    if (a.pred.empty() || a.truth.empty()) throw Error(ErrorCode::InvalidParams, "--pred and --truth go together");
    records = evaluate_dirs(a, unmatched);
  }
  if (!records.empty()) {
    std::ofstream per_image(fs::path(a.out_dir) / "per_image.csv");
    write_records_csv(per_image, records);
    const auto groups = batch_report(records);
    std::ofstream grouped(fs::path(a.out_dir) / "groups.csv");
    write_groups_csv(grouped, groups);
    for (const auto& g : groups) {
      std::cout << g.group << " (n=" << g.count << ")";
      for (std::size_t m = 0; m < kMetricNames.size(); ++m) {
        if (g.metrics[m].count == 0) continue;
        std::cout << ' ' << kMetricNames[m] << '=' << std::setprecision(6) << g.metrics[m].mean;
      }
      std::cout << '\n';
    }
    if (!a.wilcoxon.empty()) print_wilcoxon(records, a.wilcoxon);
  }
  if (!a.ratings.empty()) print_kappa(a.ratings, a.out_dir);
  if (records.empty() && a.ratings.empty()) {
    std::cerr << "nothing to evaluate\n";
    return 1;
  }
  if (unmatched > 0) std::cerr << unmatched << " unmatched file(s)\n";
  return 0;
}

// --- serve -----------------------------------------------------------------

struct ServeArgs {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string static_dir;
  int threads = 1;
  int idle_minutes = 30;
};

int run_serve(const ServeArgs& a) {
  Service svc(ServiceOptions{a.static_dir, std::chrono::minutes(a.idle_minutes), a.threads});
  const int port = svc.bind(a.host, a.port);
  if (port < 0) {
    std::cerr << "cannot bind " << a.host << ":" << a.port << '\n';
    return 1;
  }
  std::cout << "listening on http://" << a.host << ":" << port << std::endl;
  return svc.listen() ? 0 : 1;
}

int default_port() {
  if (const char* env = std::getenv("BFSEG_PORT")) {
    try {
      return std::stoi(env);
    } catch (const std::exception&) {
    }
  }
  return 8080;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unsupervised bright-field segmentation with fuzzy inference and local spatial statistics"};
  app.require_subcommand(1);

  SegmentArgs seg;
  auto* seg_cmd = app.add_subcommand("segment", "Segment one image and write the final mask PNG");
  seg_cmd->add_option("--input,-i", seg.input, "Input raster (PNG, TIFF, BMP)")->required();
  seg_cmd->add_option("--output,-o", seg.output, "Output mask PNG")->required();
  seg_cmd->add_option("--uncertainty", seg.uncertainty, "Write the uncertainty overlay PNG here");
  seg_cmd->add_option("--provenance", seg.provenance, "Write the per-pixel provenance raster PNG here");
  seg_cmd->add_option("--raw-mask", seg.raw_mask, "Write the mask before denoising here");
  seg_cmd->add_flag("--no-denoise", seg.no_denoise, "Skip the profile's denoise steps");
  seg_cmd->add_option("--threads", seg.threads, "Worker threads")->check(CLI::PositiveNumber);
  seg.params.add_to(*seg_cmd);

  BatchArgs batch;
  auto* batch_cmd = app.add_subcommand("batch", "Segment every raster in a directory");
  batch_cmd->add_option("--input-dir", batch.input_dir)->required();
  batch_cmd->add_option("--output-dir", batch.output_dir)->required();
  batch_cmd->add_option("--parallelism,--threads", batch.parallelism, "Images processed concurrently")
      ->check(CLI::PositiveNumber);
  batch.params.add_to(*batch_cmd);

  CalibrateArgs cal;
  auto* cal_cmd = app.add_subcommand("calibrate", "Compute the SSDLM lower bound from background samples");
  cal_cmd->add_option("--dir", cal.dir, "Directory of background crops");
  cal_cmd->add_option("--regions", cal.regions, "CSV of image,x,y patch centres");
  cal_cmd->add_option("--patch-size", cal.patch_size, "Sampling patch size");
  cal_cmd->add_option("--stride", cal.stride, "Tiling stride inside crops (default: patch size)");
  cal_cmd->add_flag("--whole-crop", cal.whole_crop, "Use each crop in --dir as a single sample");
  cal_cmd->add_option("--write-profile", cal.write_profile, "Write a profile file carrying the new lb");
  cal_cmd->add_option("--base-profile", cal.base_profile, "Profile whose steps --write-profile copies");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Score predicted masks against ground truth");
  eval_cmd->add_option("--pred", ev.pred, "Directory of predicted masks");
  eval_cmd->add_option("--truth", ev.truth, "Directory of ground-truth masks (matched by file stem)");
  eval_cmd->add_option("--groups", ev.groups, "CSV with image,group columns");
  eval_cmd->add_option("--rows", ev.rows, "Precomputed per-image metric CSV instead of mask directories");
  eval_cmd->add_option("--ratings", ev.ratings, "CSV of image + rater columns for Cohen's kappa");
  eval_cmd->add_option("--out-dir", ev.out_dir, "Where per_image.csv and groups.csv go");
  eval_cmd->add_option("--overlays", ev.overlays, "Write comparison overlays into this directory");
  eval_cmd->add_option("--wilcoxon", ev.wilcoxon, "Paired signed-rank test between two groups, A:B");
  eval_cmd->add_flag("--boundary-hausdorff", ev.boundary_hausdorff, "Hausdorff over mask boundaries");

  ServeArgs srv;
  srv.port = default_port();
  auto* serve_cmd = app.add_subcommand("serve", "Run the calibration HTTP service");
  serve_cmd->add_option("--host", srv.host);
  serve_cmd->add_option("--port", srv.port, "Port (default $BFSEG_PORT or 8080)");
  serve_cmd->add_option("--static", srv.static_dir, "Directory of UI assets served at /");
  serve_cmd->add_option("--threads", srv.threads, "Worker threads per segmentation")->check(CLI::PositiveNumber);
  serve_cmd->add_option("--idle-minutes", srv.idle_minutes, "Session idle eviction");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*seg_cmd) return run_segment(seg);
    if (*batch_cmd) return run_batch(batch);
    if (*cal_cmd) {
      if (cal.dir.empty() && cal.regions.empty()) {
        std::cerr << "calibrate needs --dir or --regions\n";
        return 2;
      }
      return run_calibrate(cal);
    }
    if (*eval_cmd) return run_eval(ev);
    if (*serve_cmd) return run_serve(srv);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
