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

#include "bfseg/image_io.hpp"

#include <fstream>
#include <iterator>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

namespace bfseg {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::CorruptData: return "CorruptData";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::EmptySupport: return "EmptySupport";
    case ErrorCode::TooSmall: return "TooSmall";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::DegenerateAgreement: return "DegenerateAgreement";
    case ErrorCode::AllZeroDifferences: return "AllZeroDifferences";
    case ErrorCode::Busy: return "Busy";
    case ErrorCode::Stale: return "Stale";
  }
  return "Unknown";
}

BinaryMask::BinaryMask(Plane8 p) : pixels(std::move(p)) {
  if (((pixels.array() != kBackground) && (pixels.array() != kForeground)).any()) {
    throw Error(ErrorCode::CorruptData, "mask contains values other than 0 and 255");
  }
}

RasterImage::RasterImage(Plane8 red, Plane8 green, Plane8 blue)
    : r(std::move(red)), g(std::move(green)), b(std::move(blue)) {
  if (g.rows() != r.rows() || b.rows() != r.rows() || g.cols() != r.cols() || b.cols() != r.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "channel planes differ in size");
  }
}

namespace {

enum class Format { Png, Tiff, Bmp, Unknown };

Format sniff(std::span<const std::uint8_t> b) {
  if (b.size() >= 8 && b[0] == 0x89 && b[1] == 'P' && b[2] == 'N' && b[3] == 'G') return Format::Png;
  if (b.size() >= 4 && ((b[0] == 'I' && b[1] == 'I' && b[2] == 42 && b[3] == 0) ||
                        (b[0] == 'M' && b[1] == 'M' && b[2] == 0 && b[3] == 42)))
    return Format::Tiff;
  if (b.size() >= 2 && b[0] == 'B' && b[1] == 'M') return Format::Bmp;
  return Format::Unknown;
}

Plane8 plane_from(const cv::Mat& m) {
  Plane8 p(m.rows, m.cols);
  for (int y = 0; y < m.rows; ++y) {
    std::copy_n(m.ptr<std::uint8_t>(y), m.cols, p.row(y).data());
  }
  return p;
}

cv::Mat mat_from(const Plane8& p) {
  cv::Mat m(static_cast<int>(p.rows()), static_cast<int>(p.cols()), CV_8UC1);
  for (int y = 0; y < m.rows; ++y) {
    std::copy_n(p.row(y).data(), m.cols, m.ptr<std::uint8_t>(y));
  }
  return m;
}

Bytes read_file(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw Error(ErrorCode::NotFound, path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::NotFound, path.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

const std::vector<int> kPngParams{cv::IMWRITE_PNG_COMPRESSION, 6};

}  // namespace

RasterImage decode_image(std::span<const std::uint8_t> bytes) {
  if (sniff(bytes) == Format::Unknown) {
    throw Error(ErrorCode::UnsupportedFormat, "not a PNG, TIFF or BMP stream");
  }
  cv::Mat raw(1, static_cast<int>(bytes.size()), CV_8UC1, const_cast<std::uint8_t*>(bytes.data()));
  cv::Mat m;
  try {
    m = cv::imdecode(raw, cv::IMREAD_UNCHANGED);
  } catch (const cv::Exception& e) {
    throw Error(ErrorCode::CorruptData, e.what());
  }
  if (m.empty()) throw Error(ErrorCode::CorruptData, "decoder rejected the stream");
  if (m.depth() != CV_8U) throw Error(ErrorCode::UnsupportedFormat, "only 8-bit rasters are supported");

  std::vector<cv::Mat> ch;
  cv::split(m, ch);
  switch (ch.size()) {
    case 1:
    case 2: {
      Plane8 gray = plane_from(ch[0]);
      return RasterImage(gray, gray, gray);
    }
    case 3:
    case 4:
      // OpenCV decodes to BGR(A).
      return RasterImage(plane_from(ch[2]), plane_from(ch[1]), plane_from(ch[0]));
    default:
      throw Error(ErrorCode::UnsupportedFormat, "unexpected channel count");
  }
}

RasterImage load_image(const std::filesystem::path& path) {
  const Bytes bytes = read_file(path);
  try {
    return decode_image(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string());
  }
}

GrayImage to_gray_average(const RasterImage& img) {
  const auto sum = img.r.cast<int>() + img.g.cast<int>() + img.b.cast<int>();
  return GrayImage(Plane8((sum.array() / 3).cast<std::uint8_t>()));
}

std::tuple<GrayImage, GrayImage, GrayImage> split_channels(const RasterImage& img) {
  return {GrayImage(img.r), GrayImage(img.g), GrayImage(img.b)};
}

RasterImage merge_channels(const GrayImage& r, const GrayImage& g, const GrayImage& b) {
  return RasterImage(r.pixels, g.pixels, b.pixels);
}

Bytes encode_png(const Plane8& gray) {
  std::vector<std::uint8_t> out;
  if (!cv::imencode(".png", mat_from(gray), out, kPngParams)) {
    throw Error(ErrorCode::IoFailure, "PNG encoding failed");
  }
  return out;
}

Bytes encode_png(const RasterImage& rgb) {
  cv::Mat m;
  cv::merge(std::vector<cv::Mat>{mat_from(rgb.b), mat_from(rgb.g), mat_from(rgb.r)}, m);
  std::vector<std::uint8_t> out;
  if (!cv::imencode(".png", m, out, kPngParams)) {
    throw Error(ErrorCode::IoFailure, "PNG encoding failed");
  }
  return out;
}

void write_bytes(const Bytes& bytes, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoFailure, "short write to " + path.string());
}

void save_mask(const BinaryMask& mask, const std::filesystem::path& path) {
  write_bytes(encode_png(mask.pixels), path);
}

BinaryMask load_mask(const std::filesystem::path& path) {
  const RasterImage img = load_image(path);
  if (img.r != img.g || img.r != img.b) {
    throw Error(ErrorCode::CorruptData, path.string() + " is not a single-channel mask");
  }
  // Accept any nonzero value as foreground so masks from other tools load.
  Plane8 p = (img.r.array() != 0).select(Plane8::Constant(img.height(), img.width(), kForeground),
                                          Plane8::Zero(img.height(), img.width()));
  return BinaryMask(std::move(p));
}

namespace {

void paint(OverlayImage& out, Eigen::Index x, Eigen::Index y, const std::array<std::uint8_t, 3>& c) {
  out.set(x, y, c[0], c[1], c[2]);
}

}  // namespace

OverlayImage render_comparison(const BinaryMask& pred, const BinaryMask& truth) {
  require_same_size(pred, truth, "render_comparison: prediction and truth differ in size");
  OverlayImage out(pred.width(), pred.height());
  for (Eigen::Index y = 0; y < pred.height(); ++y) {
    for (Eigen::Index x = 0; x < pred.width(); ++x) {
      const bool p = pred.at(x, y);
      const bool t = truth.at(x, y);
      if (p && t) paint(out, x, y, kDetected);
      else if (t) paint(out, x, y, kMissed);
      else if (p) paint(out, x, y, kFalsePositive);
      else paint(out, x, y, kTrueNegative);
    }
  }
  return out;
}

OverlayImage render_uncertainty(const GrayImage& gray, const BinaryMask& uncertain) {
  require_same_size(gray, uncertain, "render_uncertainty: image and mask differ in size");
  OverlayImage out(gray.pixels, gray.pixels, gray.pixels);
  for (Eigen::Index y = 0; y < gray.height(); ++y) {
    for (Eigen::Index x = 0; x < gray.width(); ++x) {
      if (uncertain.at(x, y)) paint(out, x, y, kUncertain);
    }
  }
  return out;
}

}  // namespace bfseg
