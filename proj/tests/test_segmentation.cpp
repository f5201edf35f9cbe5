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

#include <map>
#include <random>

#include "bfseg/image_io.hpp"
#include "bfseg/segmentation.hpp"
#include "cases.hpp"
#include "phantom.hpp"
#include "reference.hpp"

using namespace bfseg;

namespace {

RasterImage uniform(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  RasterImage img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img.set(x, y, r, g, b);
  return img;
}

RasterImage noise_image(std::mt19937& rng, int w, int h) {
  std::uniform_int_distribution<int> v(0, 255);
  std::uniform_int_distribution<int> jitter(-15, 15);
  RasterImage img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int g = (x / 6 + y / 5) % 3 == 0 ? v(rng) : 110 + jitter(rng);
      img.set(x, y, std::clamp(g + jitter(rng), 0, 255), g, std::clamp(g + jitter(rng), 0, 255));
    }
  return img;
}

}  // namespace

TEST_CASE("provenance levels round-trip") {
  for (auto p : kAllProvenances) CHECK(provenance_from_level(provenance_level(p)) == p);
  CHECK(provenance_level(Provenance::PrimaryMask) == 0);
  CHECK(provenance_level(Provenance::NavHighTexture) == 255);
  CHECK_FALSE(provenance_from_level(7).has_value());
}

TEST_CASE("flat images are fully primary-masked") {
  for (std::uint8_t v : {0, 110, 255}) {
    const auto img = uniform(20, 15, v, v, v);
    const auto res = segment(img, {});
    CHECK(res.mask.empty());
    CHECK(res.uncertainty.empty());
    CHECK((res.provenance.array() == provenance_level(Provenance::PrimaryMask)).all());
    CHECK(primary_mask(to_gray_average(img), {}).empty());
  }
}

TEST_CASE("primary mask uses a strict lower bound") {
  // Checkerboard of 10/12 has SSDLM close to 1 everywhere inside.
  RasterImage img(9, 9);
  for (int y = 0; y < 9; ++y)
    for (int x = 0; x < 9; ++x) {
      const std::uint8_t v = (x + y) % 2 ? 12 : 10;
      img.set(x, y, v, v, v);
    }
  SegmentationConfig cfg;
  cfg.thresholds.patch_size = 3;
  PlaneD centre = extract_patch<double>(to_gray_average(img).pixels, 4, 4, 3);
  cfg.thresholds.lb = ssdlm(centre);
  CHECK(primary_mask(to_gray_average(img), cfg).at(4, 4));
  cfg.thresholds.lb = std::nextafter(cfg.thresholds.lb, 100.0);
  CHECK_FALSE(primary_mask(to_gray_average(img), cfg).at(4, 4));
}

TEST_CASE("resolve_ambiguous branches") {
  SegmentationConfig cfg;
  ChannelPatches rgb{PlaneD::Constant(5, 5, 110), PlaneD::Constant(5, 5, 110), PlaneD::Constant(5, 5, 110)};

  SUBCASE("constant neighbourhood is background") {
    const auto v = resolve_ambiguous(rgb, PlaneD::Constant(5, 5, 110), cfg);
    CHECK(v == PixelVerdict{false, Provenance::NavMoran});
  }
  SUBCASE("strong texture is foreground") {
    PlaneD g(5, 5);
    for (int i = 0; i < 25; ++i) g.data()[i] = (i * 7919) % 2 ? 60 : 160;
    cfg.thresholds.nav = 1.0;
    const auto v = resolve_ambiguous(rgb, g, cfg);
    CHECK(v == PixelVerdict{true, Provenance::NavHighTexture});
  }
  SUBCASE("dispersed low texture is background") {
    PlaneD g(5, 5);
    for (int r = 0; r < 5; ++r)
      for (int c = 0; c < 5; ++c) g(r, c) = (r + c) % 2 ? 112 : 108;
    const auto v = resolve_ambiguous(rgb, g, cfg);
    CHECK(v == PixelVerdict{false, Provenance::NavMoran});
  }
  SUBCASE("clustered low texture goes to the channel rule") {
    PlaneD g(5, 5);
    for (int r = 0; r < 5; ++r)
      for (int c = 0; c < 5; ++c) g(r, c) = 100 + 2 * c;
    ChannelPatches ch{g * 3.0, g * 2.0, g * 1.0};
    ch.r.array() -= 200;
    ch.g.array() -= 114;
    ch.b.array() -= 0;
    // centre: R = 112, G = 94, B = 104; dR > dG > dB; G below green_cut.
    auto v = resolve_ambiguous(ch, g, cfg);
    CHECK(v == PixelVerdict{false, Provenance::ChannelRule});
    cfg.green_cut = 90;
    v = resolve_ambiguous(ch, g, cfg);
    CHECK(v == PixelVerdict{true, Provenance::ChannelRule});
  }
}

TEST_CASE("pipeline matches the reference on random ambiguous pixels") {
  std::mt19937 rng(21);
  std::map<Provenance, int> seen;
  for (int i = 0; i < 2000; ++i) {
    const auto c = cases::random_ambiguous(rng);
    const auto res = segment(c.image, c.cfg);
    const auto expect = reference::pixel(c.image, reference::gray_of(c.image), c.centre, c.centre, c.cfg);
    REQUIRE(res.mask.at(c.centre, c.centre) == (expect.value == 255));
    REQUIRE(res.provenance(c.centre, c.centre) == provenance_level(expect.tag));
    REQUIRE(res.uncertainty.at(c.centre, c.centre));
    ++seen[expect.tag];
  }
  CHECK(seen[Provenance::NavMoran] > 0);
  CHECK(seen[Provenance::NavHighTexture] > 0);
  CHECK(seen[Provenance::ChannelRule] > 0);
}

TEST_CASE("full images match the reference pixel by pixel") {
  std::mt19937 rng(8);
  for (int k = 0; k < 6; ++k) {
    const auto img = noise_image(rng, 37 + k, 29);
    SegmentationConfig cfg = cases::random_config(rng);
    if (k % 2) cfg.classify_on = ClassifyOn::Raw;
    const auto res = segment(img, cfg);
    const auto gray = reference::gray_of(img);
    CHECK(gray == to_gray_average(img).pixels);
    for (int y = 0; y < img.height(); ++y)
      for (int x = 0; x < img.width(); ++x) {
        const auto e = reference::pixel(img, gray, x, y, cfg);
        REQUIRE(res.mask.at(x, y) == (e.value == 255));
        REQUIRE(res.uncertainty.at(x, y) == e.ambiguous);
        REQUIRE(res.provenance(y, x) == provenance_level(e.tag));
      }
  }
}

TEST_CASE("output is independent of threads and tile height") {
  const auto ph = phantom::make(4, {.width = 160, .height = 130, .blobs = 3});
  const auto base = segment(ph.image, {});
  for (int threads : {2, 3, 8})
    for (int tile : {1, 7, 64}) {
      const auto r = segment(ph.image, {}, {threads, tile});
      CHECK(r.mask == base.mask);
      CHECK(r.uncertainty == base.uncertainty);
      CHECK(r.provenance == base.provenance);
    }
}

TEST_CASE("config validation") {
  SegmentationConfig cfg;
  cfg.green_cut = 300;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.thresholds.patch_size = 2;
  CHECK_THROWS_AS(segment(uniform(8, 8, 1, 1, 1), cfg), Error);
}
