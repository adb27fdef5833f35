#include <gtest/gtest.h>

#include <cstring>
#include <limits>
#include <random>

#include "rwseg/imageio.hpp"
#include "support.hpp"

using namespace rwseg;
using io::Bytes;

namespace {

Bytes pgm(std::size_t w, std::size_t h, const Bytes& px, int maxval = 255) {
  std::string hdr = "P5\n# test\n" + std::to_string(w) + " " + std::to_string(h) + "\n" + std::to_string(maxval) + "\n";
  Bytes out(hdr.begin(), hdr.end());
  out.insert(out.end(), px.begin(), px.end());
  return out;
}

Bytes gray_png(std::size_t w, std::size_t h, const Bytes& px) { return io::encode_png({w, h, 1, px}); }

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::invalid_input;
}

}  // namespace

TEST(LoadImage, PgmNormalization) {
  auto img = io::decode_image(pgm(2, 2, {0, 85, 170, 255}));
  ASSERT_EQ(img.width(), 2u);
  EXPECT_DOUBLE_EQ(img.intensity()[0], 0.0);
  EXPECT_DOUBLE_EQ(img.intensity()[1], 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(img.intensity()[2], 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(img.intensity()[3], 1.0);
  EXPECT_FALSE(img.has_color());
}

TEST(LoadImage, PgmWithSmallMaxvalIsRescaled) {
  auto img = io::decode_image(pgm(2, 2, {0, 1, 2, 3}, 3));
  EXPECT_DOUBLE_EQ(img.intensity()[1], 85.0 / 255.0);
  EXPECT_DOUBLE_EQ(img.intensity()[3], 1.0);
}

TEST(LoadImage, RgbLuma) {
  Bytes rgb{255, 255, 255, 255, 0, 0, 0, 255, 0, 0, 0, 255};
  for (const auto& bytes : {io::encode_png({2, 2, 3, rgb}), io::encode_pnm({2, 2, 3, rgb})}) {
    auto img = io::decode_image(bytes);
    EXPECT_DOUBLE_EQ(img.intensity()[0], 1.0);
    EXPECT_NEAR(img.intensity()[1], 0.299, 1e-12);
    EXPECT_NEAR(img.intensity()[2], 0.587, 1e-12);
    EXPECT_NEAR(img.intensity()[3], 0.114, 1e-12);
    EXPECT_TRUE(img.has_color());
    EXPECT_EQ(io::from_image(img).data, rgb);
  }
}

TEST(LoadImage, PngGrayRoundTrip) {
  Bytes px{0, 10, 20, 30, 40, 250};
  auto img = io::decode_image(gray_png(3, 2, px));
  EXPECT_EQ(img.width(), 3u);
  EXPECT_EQ(img.height(), 2u);
  EXPECT_EQ(io::from_image(img).data, px);
}

TEST(LoadImage, Rejections) {
  EXPECT_EQ(code_of([] { io::decode_image(Bytes{'G', 'I', 'F', '8'}); }), ErrorCode::unsupported_format);
  EXPECT_EQ(code_of([] { io::decode_image(pgm(1, 3, {1, 2, 3})); }), ErrorCode::invalid_input);
  EXPECT_EQ(code_of([] { io::decode_image(pgm(2, 2, {1, 2, 3})); }), ErrorCode::corrupt_file);
  EXPECT_EQ(code_of([] { io::decode_image(pgm(2, 2, {1, 2, 3, 4}, 65535)); }), ErrorCode::unsupported_format);
  EXPECT_EQ(code_of([] { io::decode_image(pgm(2, 2, {1, 2, 3, 9}, 4)); }), ErrorCode::corrupt_file);
  auto png = gray_png(4, 4, Bytes(16, 7));
  png.resize(png.size() / 2);
  EXPECT_EQ(code_of([&] { io::decode_image(png); }), ErrorCode::corrupt_file);
  auto garbled = gray_png(4, 4, Bytes(16, 7));
  for (std::size_t i = 40; i < garbled.size(); ++i) garbled[i] ^= 0x5a;
  EXPECT_EQ(code_of([&] { io::decode_image(garbled); }), ErrorCode::corrupt_file);
  EXPECT_EQ(code_of([] { io::load_image("/nonexistent/rwseg.png"); }), ErrorCode::invalid_input);
}

TEST(SeedMask, CodesDecode) {
  auto s = io::decode_seed_mask(gray_png(3, 2, {0, 1, 2, 2, 0, 1}));
  EXPECT_EQ(s.pixel_count, 6u);
  EXPECT_EQ(s.background_indices(), (std::vector<std::size_t>{1, 5}));
  EXPECT_EQ(s.foreground_indices(), (std::vector<std::size_t>{2, 3}));
}

TEST(SeedMask, AllZeroIsEmpty) {
  auto s = io::decode_seed_mask(gray_png(4, 4, Bytes(16, 0)));
  EXPECT_EQ(s.seeded_count(), 0u);
  EXPECT_EQ(s.pixel_count, 16u);
}

TEST(SeedMask, RoundTrip) {
  auto dir = rwtest::temp_dir("seedmask");
  auto s = SeedState::from_indices(12, {0, 5, 11}, {3, 4});
  io::save_seed_mask(s, 4, 3, dir / "s.png");
  auto back = io::load_seed_mask(dir / "s.png", 4, 3);
  EXPECT_EQ(back.foreground, s.foreground);
  EXPECT_EQ(back.background, s.background);
}

TEST(SeedMask, Rejections) {
  EXPECT_EQ(code_of([] { io::decode_seed_mask(gray_png(2, 2, {0, 1, 3, 0})); }), ErrorCode::unknown_code);
  EXPECT_EQ(code_of([] { io::decode_seed_mask(gray_png(2, 2, {0, 1, 255, 0})); }), ErrorCode::unknown_code);
  EXPECT_EQ(code_of([] { io::decode_seed_mask(gray_png(2, 2, {0, 1, 2, 0}), 3, 2); }), ErrorCode::dimension_mismatch);
  EXPECT_EQ(code_of([] { io::decode_seed_mask(io::encode_png({2, 2, 3, Bytes(12, 0)})); }),
            ErrorCode::unsupported_format);
}

TEST(Trimap, CodesDecodeAndRoundTrip) {
  auto t = io::decode_trimap(gray_png(2, 2, {0, 128, 255, 0}));
  EXPECT_EQ(t.codes, (std::vector<TrimapCode>{TrimapCode::background, TrimapCode::unclassified,
                                              TrimapCode::foreground, TrimapCode::background}));
  auto dir = rwtest::temp_dir("trimap");
  io::save_trimap(t, dir / "t.png");
  EXPECT_EQ(io::load_trimap(dir / "t.png", 2, 2).codes, t.codes);
}

TEST(Trimap, Rejections) {
  EXPECT_EQ(code_of([] { io::decode_trimap(gray_png(2, 2, {0, 127, 255, 0})); }), ErrorCode::unknown_code);
  EXPECT_EQ(code_of([] { io::decode_trimap(gray_png(2, 2, {0, 1, 2, 0})); }), ErrorCode::unknown_code);
  EXPECT_EQ(code_of([] { io::decode_trimap(gray_png(2, 2, {0, 0, 0, 0}), 2, 3); }), ErrorCode::dimension_mismatch);
}

TEST(ProbabilityPng, ByteRule) {
  EXPECT_EQ(io::probability_byte(0.5), 128);
  EXPECT_EQ(io::probability_byte(0.0), 0);
  EXPECT_EQ(io::probability_byte(1.0), 255);
  EXPECT_EQ(io::probability_byte(-0.1), 0);
  EXPECT_EQ(io::probability_byte(1.1), 255);
  EXPECT_EQ(io::probability_byte(1.0 / 255.0 * 0.5), 1);
}

TEST(ProbabilityPng, MonotoneInP) {
  int last = -1;
  for (int k = 0; k <= 10000; ++k) {
    const int b = io::probability_byte(k / 10000.0);
    EXPECT_GE(b, last);
    last = b;
  }
}

TEST(ProbabilityPng, EncodesClampedMap) {
  auto m = ProbabilityMap::from_raw(2, 2, {0.0, 0.5, 1.2, -3.0});
  auto r = io::decode_png(io::encode_probability_png(m));
  EXPECT_EQ(r.data, (Bytes{0, 128, 255, 0}));
}

TEST(Pmap, LayoutIsDocumented) {
  std::vector<double> v{0.25, -1.0};
  auto b = io::encode_probability_raster(2, 1, v);
  ASSERT_EQ(b.size(), 16u + 16u);
  EXPECT_EQ(std::memcmp(b.data(), "PMAP", 4), 0);
  EXPECT_EQ(b[4], 2);
  EXPECT_EQ(b[8], 1);
  for (int i = 12; i < 16; ++i) EXPECT_EQ(b[i], 0);
  // 0.25 = 0x3FD0000000000000, little-endian
  EXPECT_EQ(b[16 + 7], 0x3F);
  EXPECT_EQ(b[16 + 6], 0xD0);
  for (int i = 16; i < 22; ++i) EXPECT_EQ(b[i], 0);
}

TEST(Pmap, RoundTripIsBitIdentical) {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> u(-0.1, 1.1);
  auto dir = rwtest::temp_dir("pmap");
  for (int t = 0; t < 10; ++t) {
    const std::size_t w = 2 + rng() % 30, h = 2 + rng() % 30;
    std::vector<double> raw(w * h);
    for (auto& x : raw) x = u(rng);
    raw[0] = std::numeric_limits<double>::denorm_min();
    raw[1] = -0.0;
    auto m = ProbabilityMap::from_raw(w, h, raw);
    io::save_probability_map(m, dir / "p.pmap");
    auto back = io::load_probability_map(dir / "p.pmap");
    ASSERT_EQ(back.width, w);
    ASSERT_EQ(back.height, h);
    EXPECT_EQ(std::memcmp(back.raw.data(), raw.data(), raw.size() * sizeof(double)), 0);
  }
}

TEST(Pmap, Rejections) {
  auto good = io::encode_probability_raster(2, 2, std::vector<double>(4, 0.5));
  EXPECT_EQ(code_of([&] { io::decode_probability_raster(Bytes(good.begin(), good.begin() + 10)); }),
            ErrorCode::unsupported_format);
  auto bad_magic = good;
  bad_magic[0] = 'X';
  EXPECT_EQ(code_of([&] { io::decode_probability_raster(bad_magic); }), ErrorCode::unsupported_format);
  auto truncated = good;
  truncated.pop_back();
  EXPECT_EQ(code_of([&] { io::decode_probability_raster(truncated); }), ErrorCode::corrupt_file);
  auto reserved = good;
  reserved[12] = 1;
  EXPECT_EQ(code_of([&] { io::decode_probability_raster(reserved); }), ErrorCode::corrupt_file);
}

TEST(LabelsPng, ZeroAndTwoFiftyFive) {
  std::vector<std::uint8_t> labels{0, 1, 1, 0};
  EXPECT_EQ(io::decode_png(io::encode_labels_png(labels, 2, 2)).data, (Bytes{0, 255, 255, 0}));
  EXPECT_THROW(io::encode_labels_png(labels, 3, 2), Error);
}

TEST(BoundaryPng, MarksBand) {
  std::vector<std::size_t> e{1, 2};
  EXPECT_EQ(io::decode_png(io::encode_boundary_png(e, 2, 2)).data, (Bytes{0, 255, 255, 0}));
}
