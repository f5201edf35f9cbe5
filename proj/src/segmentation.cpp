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

#include "bfseg/segmentation.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "bfseg/image_io.hpp"

namespace bfseg {

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::PrimaryMask: return "primary_mask";
    case Provenance::FuzzyBlack: return "fuzzy_black";
    case Provenance::FuzzyWhite: return "fuzzy_white";
    case Provenance::NavMoran: return "nav_moran";
    case Provenance::ChannelRule: return "channel_rule";
    case Provenance::NavHighTexture: return "nav_high_texture";
  }
  return "?";
}

std::uint8_t provenance_level(Provenance p) { return static_cast<std::uint8_t>(static_cast<int>(p) * 51); }

std::optional<Provenance> provenance_from_level(std::uint8_t level) {
  if (level % 51 != 0) return std::nullopt;
  return static_cast<Provenance>(level / 51);
}

void SegmentationConfig::validate() const {
  fuzzy.validate();
  thresholds.validate();
  if (!(green_cut >= 0.0 && green_cut <= 255.0)) {
    throw Error(ErrorCode::InvalidParams, "green cut must lie in [0, 255]");
  }
}

BinaryMask primary_mask(const GrayImage& gray, const SegmentationConfig& cfg) {
  cfg.thresholds.validate();
  const int n = cfg.thresholds.patch_size;
  BinaryMask out(gray.width(), gray.height(), true);
  Patch<double> patch;
  for (Eigen::Index y = 0; y < gray.height(); ++y) {
    for (Eigen::Index x = 0; x < gray.width(); ++x) {
      extract_patch_into(gray.pixels, x, y, n, patch);
      if (ssdlm(patch) < cfg.thresholds.lb) out.set(x, y, false);
    }
  }
  return out;
}

namespace {

double centre(const Patch<double>& p) { return p(p.rows() / 2, p.cols() / 2); }

PixelVerdict channel_rule(const ChannelPatches& rgb, double green_cut) {
  const double r = centre(rgb.r);
  const double g = centre(rgb.g);
  const double b = centre(rgb.b);
  const bool green_low = g < green_cut && g < r && g < b;
  const double dr = cssni(rgb.r);
  const double dg = cssni(rgb.g);
  const double db = cssni(rgb.b);
  const bool contrast_order = dr > dg && dg > db;
  return {!(green_low && contrast_order), Provenance::ChannelRule};
}

}  // namespace

PixelVerdict resolve_ambiguous(const ChannelPatches& rgb, const Patch<double>& gray_patch,
                               const SegmentationConfig& cfg, const InverseDistanceWeights& weights) {
  const auto nav = nav_normalized(gray_patch, cfg.variogram_distance);
  if (!nav) return {false, Provenance::NavMoran};
  if (*nav >= cfg.thresholds.nav) return {true, Provenance::NavHighTexture};

  const auto moran = morans_i(gray_patch, weights);
  if (!moran || *moran < cfg.thresholds.randomness) return {false, Provenance::NavMoran};

  return channel_rule(rgb, cfg.green_cut);
}

PixelVerdict resolve_ambiguous(const ChannelPatches& rgb, const Patch<double>& gray_patch,
                               const SegmentationConfig& cfg) {
  return resolve_ambiguous(rgb, gray_patch, cfg,
                           InverseDistanceWeights(gray_patch.rows(), gray_patch.cols()));
}

namespace {

struct TileContext {
  const RasterImage& img;
  const GrayImage& gray;
  const SegmentationConfig& cfg;
  const InverseDistanceWeights& weights;
  SegmentationResult& out;
};

void segment_rows(const TileContext& ctx, Eigen::Index y0, Eigen::Index y1) {
  const int n = ctx.cfg.thresholds.patch_size;
  Patch<double> gray_patch;
  ChannelPatches rgb;
  for (Eigen::Index y = y0; y < y1; ++y) {
    for (Eigen::Index x = 0; x < ctx.gray.width(); ++x) {
      extract_patch_into(ctx.gray.pixels, x, y, n, gray_patch);
      PixelVerdict v;
      bool ambiguous = false;
      if (ssdlm(gray_patch) < ctx.cfg.thresholds.lb) {
        v = {false, Provenance::PrimaryMask};
      } else {
        switch (classify(ctx.gray(x, y), ctx.cfg.fuzzy, ctx.cfg.classify_on)) {
          case FuzzyClass::Black:
            v = {false, Provenance::FuzzyBlack};
            break;
          case FuzzyClass::White:
            v = {true, Provenance::FuzzyWhite};
            break;
          case FuzzyClass::Ambiguous:
            ambiguous = true;
            extract_patch_into(ctx.img.r, x, y, n, rgb.r);
            extract_patch_into(ctx.img.g, x, y, n, rgb.g);
            extract_patch_into(ctx.img.b, x, y, n, rgb.b);
            v = resolve_ambiguous(rgb, gray_patch, ctx.cfg, ctx.weights);
            break;
        }
      }
      ctx.out.mask.set(x, y, v.foreground);
      ctx.out.uncertainty.set(x, y, ambiguous);
      ctx.out.provenance(y, x) = provenance_level(v.provenance);
    }
  }
}

}  // namespace

SegmentationResult segment(const RasterImage& img, const SegmentationConfig& cfg, const SegmentOptions& opts) {
  cfg.validate();
  if (img.width() <= 0 || img.height() <= 0) {
    throw Error(ErrorCode::InvalidParams, "segment: empty image");
  }
  const GrayImage gray = to_gray_average(img);
  const int n = cfg.thresholds.patch_size;
  const InverseDistanceWeights weights(n, n);

  SegmentationResult out{BinaryMask(img.width(), img.height()), BinaryMask(img.width(), img.height()),
                         Plane8::Zero(img.height(), img.width())};
  const TileContext ctx{img, gray, cfg, weights, out};

  const Eigen::Index tile = std::max(1, opts.tile_rows);
  const Eigen::Index tiles = (img.height() + tile - 1) / tile;
  const int workers = static_cast<int>(std::clamp<Eigen::Index>(opts.threads, 1, tiles));

  if (workers == 1) {
    segment_rows(ctx, 0, img.height());
    return out;
  }

  // Tiles cover disjoint rows, so the claim order does not affect the output.
  std::atomic<Eigen::Index> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      try {
        for (Eigen::Index t = next++; t < tiles; t = next++) {
          segment_rows(ctx, t * tile, std::min(img.height(), (t + 1) * tile));
        }
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace bfseg
