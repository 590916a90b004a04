// Copyright 2026 The wmbench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// -----------------------------------------------------------------------------
//
// 8-bit PNG and binary PGM/PPM reading and writing.

#ifndef WMBENCH_IMAGE_IO_HPP_
#define WMBENCH_IMAGE_IO_HPP_

#include <algorithm>
#include <png.h>

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>
#include <vector>

#include "wmbench/image.hpp"

namespace wmbench {

class ImageIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::uint8_t QuantizeTo8Bit(double v) {
  // round-half-up of clamp(v,0,1)*255
  const double c = std::clamp(v, 0.0, 1.0);
  return static_cast<std::uint8_t>(std::floor(c * 255.0 + 0.5));
}

inline Image ImageFromBytes(int width, int height, int channels,
                            const std::vector<std::uint8_t>& bytes) {
  std::vector<double> data(bytes.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) data[i] = bytes[i] / 255.0;
  return Image(width, height, channels, std::move(data));
}

inline std::vector<std::uint8_t> ImageToBytes(const Image& img) {
  std::vector<std::uint8_t> bytes(img.size());
  const auto d = img.data();
  for (std::size_t i = 0; i < d.size(); ++i) bytes[i] = QuantizeTo8Bit(d[i]);
  return bytes;
}

namespace detail {

inline std::vector<std::uint8_t> ReadAll(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ImageIoError("cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

// Parses one whitespace-delimited PNM header integer, skipping comments.
inline int PnmHeaderInt(const std::vector<std::uint8_t>& buf, std::size_t& pos,
                        const std::string& name) {
  while (pos < buf.size()) {
    if (buf[pos] == '#') {
      while (pos < buf.size() && buf[pos] != '\n') ++pos;
    } else if (std::isspace(buf[pos])) {
      ++pos;
    } else {
      break;
    }
  }
  if (pos >= buf.size() || !std::isdigit(buf[pos])) {
    throw ImageIoError(name + ": malformed PNM header");
  }
  long v = 0;
  while (pos < buf.size() && std::isdigit(buf[pos])) {
    v = v * 10 + (buf[pos] - '0');
    if (v > (1 << 24)) throw ImageIoError(name + ": PNM header value too big");
    ++pos;
  }
  return static_cast<int>(v);
}

inline Image LoadPnm(const std::vector<std::uint8_t>& buf,
                     const std::string& name) {
  const int channels = buf[1] == '5' ? 1 : 3;
  std::size_t pos = 2;
  const int w = PnmHeaderInt(buf, pos, name);
  const int h = PnmHeaderInt(buf, pos, name);
  const int maxval = PnmHeaderInt(buf, pos, name);
  if (w == 0 || h == 0) throw ImageIoError(name + ": zero-dimension image");
  if (maxval != 255) {
    throw ImageIoError(name + ": only 8-bit (maxval 255) PNM is supported");
  }
  if (pos >= buf.size() || !std::isspace(buf[pos])) {
    throw ImageIoError(name + ": malformed PNM header");
  }
  ++pos;
  const std::size_t need = static_cast<std::size_t>(w) * h * channels;
  if (buf.size() - pos < need) throw ImageIoError(name + ": truncated file");
  std::vector<std::uint8_t> px(buf.begin() + static_cast<long>(pos),
                               buf.begin() + static_cast<long>(pos + need));
  return ImageFromBytes(w, h, channels, px);
}

inline Image LoadPng(const std::vector<std::uint8_t>& buf,
                     const std::string& name) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&png, buf.data(), buf.size())) {
    throw ImageIoError(name + ": " + png.message);
  }
  if (png.width == 0 || png.height == 0) {
    png_image_free(&png);
    throw ImageIoError(name + ": zero-dimension image");
  }
  const int channels = (png.format & PNG_FORMAT_FLAG_COLOR) ? 3 : 1;
  png.format = channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<std::uint8_t> px(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, px.data(), 0, nullptr)) {
    const std::string msg = png.message;
    png_image_free(&png);
    throw ImageIoError(name + ": " + msg);
  }
  return ImageFromBytes(static_cast<int>(png.width),
                        static_cast<int>(png.height), channels, px);
}

inline std::vector<std::uint8_t> EncodePng(const Image& img) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(img.width());
  png.height = static_cast<png_uint_32>(img.height());
  png.format = img.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const auto bytes = ImageToBytes(img);
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&png, nullptr, &size, 0, bytes.data(), 0,
                                 nullptr)) {
    throw ImageIoError(std::string("png encode: ") + png.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&png, out.data(), &size, 0, bytes.data(), 0,
                                 nullptr)) {
    throw ImageIoError(std::string("png encode: ") + png.message);
  }
  out.resize(size);
  return out;
}

inline std::vector<std::uint8_t> EncodePnm(const Image& img) {
  const std::string header = std::string(img.channels() == 1 ? "P5" : "P6") +
                             "\n" + std::to_string(img.width()) + " " +
                             std::to_string(img.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  const auto bytes = ImageToBytes(img);
  out.insert(out.end(), bytes.begin(), bytes.end());
  return out;
}

}  // namespace detail

// Writes through a sibling temp file and renames it into place.
inline void WriteFileAtomic(const std::filesystem::path& path,
                            const void* data, std::size_t size) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ImageIoError("cannot write " + path.string());
    out.write(static_cast<const char*>(data),
              static_cast<std::streamsize>(size));
    if (!out) throw ImageIoError("write failed for " + path.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw ImageIoError("cannot rename into " + path.string());
  }
}

inline Image LoadImage(const std::filesystem::path& path) {
  const auto buf = detail::ReadAll(path);
  const std::string name = path.string();
  static constexpr std::uint8_t kPngMagic[8] = {0x89, 'P',  'N',  'G',
                                                0x0D, 0x0A, 0x1A, 0x0A};
  if (buf.size() >= 8 && std::equal(kPngMagic, kPngMagic + 8, buf.begin())) {
    return detail::LoadPng(buf, name);
  }
  if (buf.size() >= 2 && buf[0] == 'P' && (buf[1] == '5' || buf[1] == '6')) {
    return detail::LoadPnm(buf, name);
  }
  throw ImageIoError(name + ": unsupported format");
}

// Format follows the extension: .pgm/.ppm/.pnm write binary PNM, anything
// else writes PNG. PGM requires a single channel and PPM three.
inline void SaveImage(const Image& img, const std::filesystem::path& path) {
  if (img.empty()) throw ImageIoError("SaveImage: empty image");
  std::string ext = path.extension().string();
  for (char& c : ext) c = static_cast<char>(std::tolower(c));
  std::vector<std::uint8_t> bytes;
  if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") {
    if ((ext == ".pgm" && img.channels() != 1) ||
        (ext == ".ppm" && img.channels() != 3)) {
      throw ImageIoError(path.string() + ": channel count does not match " +
                         ext);
    }
    bytes = detail::EncodePnm(img);
  } else {
    bytes = detail::EncodePng(img);
  }
  WriteFileAtomic(path, bytes.data(), bytes.size());
}

}  // namespace wmbench

#endif  // WMBENCH_IMAGE_IO_HPP_
