#pragma once

// Image, mask and probability-map serialization. PNG goes through libpng;
// binary PGM/PPM and the PMAP float raster are handled here. Byte layouts are
// documented in FORMATS.md.

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "rwseg/error.hpp"
#include "rwseg/feedback.hpp"
#include "rwseg/image.hpp"
#include "rwseg/seeds.hpp"
#include "rwseg/walks.hpp"

namespace rwseg::io {

using Bytes = std::vector<std::uint8_t>;

/// 8-bit raster with 1 (gray) or 3 (RGB) interleaved channels.
struct Raster8 {
  std::size_t width = 0;
  std::size_t height = 0;
  int channels = 1;
  Bytes data;
};

inline Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::invalid_input, "cannot open " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::invalid_input, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::invalid_input, "write failed for " + path.string());
}

// --- PNG ----------------------------------------------------------------------

namespace detail {

struct PngReadCursor {
  std::span<const std::uint8_t> bytes;
  std::size_t offset = 0;
};

inline void png_read_bytes(png_structp png, png_bytep out, png_size_t count) {
  auto* cur = static_cast<PngReadCursor*>(png_get_io_ptr(png));
  if (cur->offset + count > cur->bytes.size()) png_error(png, "truncated PNG stream");
  std::memcpy(out, cur->bytes.data() + cur->offset, count);
  cur->offset += count;
}

inline void png_write_bytes(png_structp png, png_bytep in, png_size_t count) {
  auto* out = static_cast<Bytes*>(png_get_io_ptr(png));
  out->insert(out->end(), in, in + count);
}

inline void png_flush_noop(png_structp) {}

inline void png_warning_silent(png_structp, png_const_charp) {}

}  // namespace detail

inline bool is_png(std::span<const std::uint8_t> bytes) {
  return bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0;
}

/// Decodes an 8-bit PNG. Palette images are expanded, alpha is dropped.
inline Raster8 decode_png(std::span<const std::uint8_t> bytes) {
  if (!is_png(bytes)) throw Error(ErrorCode::unsupported_format, "not a PNG stream");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, detail::png_warning_silent);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::corrupt_file, "libpng initialization failed");
  }
  detail::PngReadCursor cursor{bytes, 0};
  Raster8 out;
  std::vector<png_bytep> rows;
  int bit_depth = 0;
  int color_type = 0;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::corrupt_file, "malformed PNG data");
  }
  png_set_read_fn(png, &cursor, detail::png_read_bytes);
  png_read_info(png, info);
  bit_depth = png_get_bit_depth(png, info);
  color_type = png_get_color_type(png, info);
  if (bit_depth > 8) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::unsupported_format, "only 8-bit PNG is supported");
  }
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  out.width = png_get_image_width(png, info);
  out.height = png_get_image_height(png, info);
  out.channels = png_get_channels(png, info);
  if (out.channels != 1 && out.channels != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::unsupported_format, "unexpected PNG channel layout");
  }
  out.data.resize(out.width * out.height * static_cast<std::size_t>(out.channels));
  rows.resize(out.height);
  for (std::size_t y = 0; y < out.height; ++y)
    rows[y] = out.data.data() + y * out.width * static_cast<std::size_t>(out.channels);
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return out;
}

inline Bytes encode_png(const Raster8& img) {
  if (img.channels != 1 && img.channels != 3) throw Error(ErrorCode::invalid_input, "PNG export needs 1 or 3 channels");
  if (img.data.size() != img.width * img.height * static_cast<std::size_t>(img.channels))
    throw Error(ErrorCode::invalid_input, "raster buffer does not match dimensions");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, detail::png_warning_silent);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::invalid_input, "libpng initialization failed");
  }
  Bytes out;
  std::vector<png_bytep> rows(img.height);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::invalid_input, "PNG encoding failed");
  }
  png_set_write_fn(png, &out, detail::png_write_bytes, detail::png_flush_noop);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height), 8,
               img.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (std::size_t y = 0; y < img.height; ++y)
    rows[y] = const_cast<png_bytep>(img.data.data() + y * img.width * static_cast<std::size_t>(img.channels));
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

// --- PGM / PPM -------------------------------------------------------------

inline bool is_pnm(std::span<const std::uint8_t> bytes) {
  return bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6');
}

/// Binary P5/P6 with maxval <= 255; samples are rescaled to 0..255.
inline Raster8 decode_pnm(std::span<const std::uint8_t> bytes) {
  if (!is_pnm(bytes)) throw Error(ErrorCode::unsupported_format, "not a binary PGM/PPM stream");
  const int channels = bytes[1] == '5' ? 1 : 3;
  std::size_t pos = 2;
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&] {
    skip_space();
    if (pos >= bytes.size() || !std::isdigit(bytes[pos])) throw Error(ErrorCode::corrupt_file, "bad PNM header");
    std::size_t v = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + static_cast<std::size_t>(bytes[pos++] - '0');
      if (v > (1u << 24)) throw Error(ErrorCode::corrupt_file, "PNM header value out of range");
    }
    return v;
  };
  Raster8 out;
  out.channels = channels;
  out.width = read_int();
  out.height = read_int();
  const std::size_t maxval = read_int();
  if (maxval == 0 || maxval > 255) throw Error(ErrorCode::unsupported_format, "only 8-bit PNM is supported");
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw Error(ErrorCode::corrupt_file, "bad PNM header");
  ++pos;
  const std::size_t count = out.width * out.height * static_cast<std::size_t>(channels);
  if (bytes.size() - pos < count) throw Error(ErrorCode::corrupt_file, "truncated PNM data");
  out.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                  bytes.begin() + static_cast<std::ptrdiff_t>(pos + count));
  if (maxval != 255)
    for (auto& v : out.data) {
      if (v > maxval) throw Error(ErrorCode::corrupt_file, "PNM sample above maxval");
      v = static_cast<std::uint8_t>((v * 255 + maxval / 2) / maxval);
    }
  return out;
}

inline Bytes encode_pnm(const Raster8& img) {
  std::string header = std::string(img.channels == 1 ? "P5" : "P6") + "\n" + std::to_string(img.width) + " " +
                       std::to_string(img.height) + "\n255\n";
  Bytes out(header.begin(), header.end());
  out.insert(out.end(), img.data.begin(), img.data.end());
  return out;
}

inline Raster8 decode_raster(std::span<const std::uint8_t> bytes) {
  if (is_png(bytes)) return decode_png(bytes);
  if (is_pnm(bytes)) return decode_pnm(bytes);
  throw Error(ErrorCode::unsupported_format, "expected PNG or binary PGM/PPM");
}

// --- images -----------------------------------------------------------------

inline ImageGrid to_image(const Raster8& r) {
  if (r.width < 2 || r.height < 2) throw Error(ErrorCode::invalid_input, "image must be at least 2x2");
  if (r.channels == 1) {
    std::vector<double> g(r.data.size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = r.data[i] / 255.0;
    return ImageGrid(r.width, r.height, std::move(g));
  }
  std::vector<double> rgb(r.data.size());
  for (std::size_t i = 0; i < rgb.size(); ++i) rgb[i] = r.data[i] / 255.0;
  return ImageGrid::from_rgb(r.width, r.height, std::move(rgb));
}

inline ImageGrid decode_image(std::span<const std::uint8_t> bytes) { return to_image(decode_raster(bytes)); }

inline ImageGrid load_image(const std::filesystem::path& path) { return decode_image(read_file(path)); }

/// 8-bit export of an image (RGB if the source had color).
inline Raster8 from_image(const ImageGrid& img) {
  Raster8 r;
  r.width = img.width();
  r.height = img.height();
  auto quantize = [](double v) { return static_cast<std::uint8_t>(std::floor(v * 255.0 + 0.5)); };
  if (img.has_color()) {
    r.channels = 3;
    for (double v : img.rgb()) r.data.push_back(quantize(v));
  } else {
    for (double v : img.intensity()) r.data.push_back(quantize(v));
  }
  return r;
}

// --- seed masks and trimaps --------------------------------------------------

namespace detail {

inline Raster8 decode_gray(std::span<const std::uint8_t> bytes, std::size_t width, std::size_t height,
                           const char* what) {
  Raster8 r = decode_raster(bytes);
  if (r.channels != 1) throw Error(ErrorCode::unsupported_format, std::string(what) + " must be single-channel");
  if (width != 0 && (r.width != width || r.height != height))
    throw Error(ErrorCode::dimension_mismatch, std::string(what) + " is " + std::to_string(r.width) + "x" +
                                                   std::to_string(r.height) + ", expected " + std::to_string(width) +
                                                   "x" + std::to_string(height));
  return r;
}

}  // namespace detail

/// Seed mask codes: 0 none, 1 background, 2 foreground. Pass width/height 0
/// to skip the dimension check.
inline SeedState decode_seed_mask(std::span<const std::uint8_t> bytes, std::size_t width = 0,
                                  std::size_t height = 0) {
  Raster8 r = detail::decode_gray(bytes, width, height, "seed mask");
  SeedState s(r.data.size());
  for (std::size_t i = 0; i < r.data.size(); ++i) {
    switch (r.data[i]) {
      case 0: break;
      case 1: s.background.push_back({i, Provenance::user}); break;
      case 2: s.foreground.push_back({i, Provenance::user}); break;
      default:
        throw Error(ErrorCode::unknown_code, "seed mask value " + std::to_string(r.data[i]) + " at pixel " +
                                                 std::to_string(i));
    }
  }
  return s;
}

inline SeedState load_seed_mask(const std::filesystem::path& path, std::size_t width = 0, std::size_t height = 0) {
  return decode_seed_mask(read_file(path), width, height);
}

inline Raster8 seed_mask_raster(const SeedState& seeds, std::size_t width, std::size_t height) {
  if (seeds.pixel_count != width * height) throw Error(ErrorCode::dimension_mismatch, "seed state size");
  Raster8 r{width, height, 1, Bytes(width * height, 0)};
  for (const auto& s : seeds.background) r.data.at(s.index) = 1;
  for (const auto& s : seeds.foreground) r.data.at(s.index) = 2;
  return r;
}

inline void save_seed_mask(const SeedState& seeds, std::size_t width, std::size_t height,
                           const std::filesystem::path& path) {
  write_file(path, encode_png(seed_mask_raster(seeds, width, height)));
}

/// Trimap codes: 0 background, 128 unclassified, 255 foreground.
inline Trimap decode_trimap(std::span<const std::uint8_t> bytes, std::size_t width = 0, std::size_t height = 0) {
  Raster8 r = detail::decode_gray(bytes, width, height, "trimap");
  Trimap t{r.width, r.height, {}};
  t.codes.reserve(r.data.size());
  for (std::size_t i = 0; i < r.data.size(); ++i) {
    const auto v = r.data[i];
    if (v != 0 && v != 128 && v != 255)
      throw Error(ErrorCode::unknown_code, "trimap value " + std::to_string(v) + " at pixel " + std::to_string(i));
    t.codes.push_back(static_cast<TrimapCode>(v));
  }
  return t;
}

inline Trimap load_trimap(const std::filesystem::path& path, std::size_t width = 0, std::size_t height = 0) {
  return decode_trimap(read_file(path), width, height);
}

inline void save_trimap(const Trimap& t, const std::filesystem::path& path) {
  Raster8 r{t.width, t.height, 1, {}};
  for (auto c : t.codes) r.data.push_back(static_cast<std::uint8_t>(c));
  write_file(path, encode_png(r));
}

// --- probability maps and labels ---------------------------------------------

/// round(p * 255), half up, on the clamped probabilities.
inline std::uint8_t probability_byte(double p) {
  return static_cast<std::uint8_t>(std::floor(std::clamp(p, 0.0, 1.0) * 255.0 + 0.5));
}

inline Bytes encode_probability_png(const ProbabilityMap& map) {
  Raster8 r{map.width, map.height, 1, {}};
  r.data.reserve(map.size());
  for (double p : map.clamped) r.data.push_back(probability_byte(p));
  return encode_png(r);
}

inline void save_probability_png(const ProbabilityMap& map, const std::filesystem::path& path) {
  write_file(path, encode_probability_png(map));
}

/// PMAP: "PMAP", u32 width, u32 height, u32 reserved (0), then width*height
/// little-endian IEEE-754 doubles, row-major.
inline Bytes encode_probability_raster(std::size_t width, std::size_t height, std::span<const double> values) {
  if (values.size() != width * height) throw Error(ErrorCode::dimension_mismatch, "raster size");
  Bytes out;
  out.reserve(16 + 8 * values.size());
  auto put = [&](std::uint64_t v, int n) {
    for (int b = 0; b < n; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
  };
  out.insert(out.end(), {'P', 'M', 'A', 'P'});
  put(width, 4);
  put(height, 4);
  put(0, 4);
  for (double v : values) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    put(bits, 8);
  }
  return out;
}

struct ProbabilityRaster {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> values;
};

inline ProbabilityRaster decode_probability_raster(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), "PMAP", 4) != 0)
    throw Error(ErrorCode::unsupported_format, "missing PMAP header");
  auto get = [&](std::size_t at, int n) {
    std::uint64_t v = 0;
    for (int b = 0; b < n; ++b) v |= static_cast<std::uint64_t>(bytes[at + static_cast<std::size_t>(b)]) << (8 * b);
    return v;
  };
  ProbabilityRaster r;
  r.width = get(4, 4);
  r.height = get(8, 4);
  if (get(12, 4) != 0) throw Error(ErrorCode::corrupt_file, "PMAP reserved field is not zero");
  const std::size_t n = r.width * r.height;
  if (bytes.size() != 16 + 8 * n) throw Error(ErrorCode::corrupt_file, "PMAP payload size mismatch");
  r.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t bits = get(16 + 8 * i, 8);
    std::memcpy(&r.values[i], &bits, sizeof bits);
  }
  return r;
}

inline void save_probability_map(const ProbabilityMap& map, const std::filesystem::path& path) {
  write_file(path, encode_probability_raster(map.width, map.height, map.raw));
}

inline ProbabilityMap load_probability_map(const std::filesystem::path& path) {
  auto r = decode_probability_raster(read_file(path));
  return ProbabilityMap::from_raw(r.width, r.height, std::move(r.values));
}

/// Labels as 0 (background) / 255 (foreground).
inline Bytes encode_labels_png(std::span<const std::uint8_t> labels, std::size_t width, std::size_t height) {
  if (labels.size() != width * height) throw Error(ErrorCode::dimension_mismatch, "label map size");
  Raster8 r{width, height, 1, {}};
  r.data.reserve(labels.size());
  for (auto l : labels) r.data.push_back(l ? 255 : 0);
  return encode_png(r);
}

inline void save_labels(std::span<const std::uint8_t> labels, std::size_t width, std::size_t height,
                        const std::filesystem::path& path) {
  write_file(path, encode_labels_png(labels, width, height));
}

/// 255 on S_E pixels, 0 elsewhere.
inline Bytes encode_boundary_png(std::span<const std::size_t> boundary, std::size_t width, std::size_t height) {
  Raster8 r{width, height, 1, Bytes(width * height, 0)};
  for (auto i : boundary) r.data.at(i) = 255;
  return encode_png(r);
}

}  // namespace rwseg::io
