#include <png.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include <doctest.h>

#include "mmf/common/error.hpp"
#include "mmf/imgio/codec.hpp"
#include "mmf/imgio/reference.hpp"
#include "mmf/imgio/signal.hpp"
#include "support.hpp"

using namespace mmf;
using namespace mmf::imgio;

namespace {

// Writes a grayscale PNG straight through libpng, bypassing our encoder.
void write_gray_png(const std::filesystem::path& p, int w, int h, int depth, const std::vector<unsigned>& px) {
  FILE* f = std::fopen(p.c_str(), "wb");
  REQUIRE(f);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  png_init_io(png, f);
  png_set_IHDR(png, info, w, h, depth, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const int bps = depth / 8;
  std::vector<png_byte> row(static_cast<std::size_t>(w) * bps);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const unsigned v = px[static_cast<std::size_t>(y) * w + x];
      if (bps == 1) {
        row[x] = static_cast<png_byte>(v);
      } else {
        row[2 * x] = static_cast<png_byte>(v >> 8);
        row[2 * x + 1] = static_cast<png_byte>(v & 0xff);
      }
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(f);
}

double rms_diff(const ImageTensor& a, const ImageTensor& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a.values()[i] - b.values()[i]) * (a.values()[i] - b.values()[i]);
  return std::sqrt(s / static_cast<double>(a.size()));
}

}  // namespace

TEST_CASE("decode 8-bit grayscale png normalizes by 255") {
  test::TempDir dir("imgio");
  write_gray_png(dir / "g.png", 2, 2, 8, {0, 128, 255, 64});
  const auto img = decode(dir / "g.png");
  REQUIRE(img.height() == 2);
  REQUIRE(img.width() == 2);
  REQUIRE(img.channels() == 1);
  CHECK(img.at(0, 0) == 0.0);
  CHECK(img.at(0, 1) == 128.0 / 255.0);
  CHECK(img.at(1, 0) == 1.0);
  CHECK(img.at(1, 1) == 64.0 / 255.0);
}

TEST_CASE("decode 16-bit png normalizes by 65535") {
  test::TempDir dir("imgio");
  write_gray_png(dir / "g16.png", 2, 1, 16, {65535, 1000});
  const auto img = decode(dir / "g16.png");
  CHECK(img.at(0, 0) == 1.0);
  CHECK(img.at(0, 1) == doctest::Approx(1000.0 / 65535.0).epsilon(1e-15));
}

TEST_CASE("truncated png and unknown formats are rejected") {
  test::TempDir dir("imgio");
  const auto bytes = encode_png_memory(test::noise_image(32, 32, 3, 1));
  {
    std::ofstream out(dir / "t.png", std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size() / 2));
  }
  CHECK_THROWS_AS(decode(dir / "t.png"), IoError);
  {
    std::ofstream out(dir / "x.bmp", std::ios::binary);
    out << "BM not an image";
  }
  CHECK_THROWS_AS(decode(dir / "x.bmp"), IoError);
  CHECK_THROWS_AS(decode(dir / "missing.png"), IoError);
}

TEST_CASE("png round trip is exact on 8-bit values") {
  Rng rng(3);
  ImageTensor img(17, 23, 3);
  for (double& v : img.values()) v = static_cast<double>(uniform_int(rng, 0, 255)) / 255.0;
  const auto back = decode_memory(encode_png_memory(img));
  CHECK(back == img);
}

TEST_CASE("jpeg decode stays within unit range") {
  test::TempDir dir("imgio");
  encode_jpeg(test::textured_image(256, 256, 3, 5), dir / "a.jpg");
  const auto img = decode(dir / "a.jpg");
  CHECK(img.height() == 256);
  CHECK(img.width() == 256);
  CHECK(img.channels() == 3);
  for (double v : img.values()) REQUIRE((v >= 0.0 && v <= 1.0));
}

TEST_CASE("grayscale uses Rec.601 weights") {
  ImageTensor red(1, 1, 3);
  red.at(0, 0, 0) = 1.0;
  CHECK(to_grayscale(red).at(0, 0) == doctest::Approx(0.299).epsilon(1e-15));
  ImageTensor gray(1, 1, 3, 0.37);
  CHECK(to_grayscale(gray).at(0, 0) == doctest::Approx(0.37).epsilon(1e-15));
  const auto one = test::noise_image(8, 8, 1, 2);
  CHECK(to_grayscale(one) == one);
  const auto g = to_grayscale(test::noise_image(16, 16, 3, 9));
  for (double v : g.values()) CHECK((v >= 0.0 && v <= 1.0));
}

TEST_CASE("gaussian kernel") {
  const auto k1 = gaussian_kernel(1, 0.7);
  REQUIRE(k1.taps().size() == 1);
  CHECK(k1.taps()[0] == 1.0);

  const auto k = gaussian_kernel(11, 1.5);
  double sum = 0.0;
  for (int i = -5; i <= 5; ++i)
    for (int j = -5; j <= 5; ++j) sum += std::exp(-(i * i + j * j) / (2.0 * 1.5 * 1.5));
  for (int i = -5; i <= 5; ++i)
    for (int j = -5; j <= 5; ++j)
      CHECK(k.tap(i + 5, j + 5) == doctest::Approx(std::exp(-(i * i + j * j) / 4.5) / sum).epsilon(1e-12));
  CHECK(k.tap(5, 5) == doctest::Approx(0.0707).epsilon(0.005));
  double total = 0.0;
  for (double t : k.taps()) total += t;
  CHECK(std::abs(total - 1.0) < 1e-9);

  const auto wide = gaussian_kernel(3, 1e6);
  for (double t : wide.taps()) CHECK(t == doctest::Approx(1.0 / 9.0).epsilon(1e-9));

  CHECK_THROWS_AS(gaussian_kernel(4, 1.0), InvalidArgument);
  CHECK_THROWS_AS(gaussian_kernel(3, 0.0), InvalidArgument);
}

TEST_CASE("convolve_same") {
  const auto img = test::noise_image(12, 9, 3, 4);
  const Kernel2D ident(3, 3, {0, 0, 0, 0, 1, 0, 0, 0, 0}, true);
  CHECK(convolve_same(img, ident) == img);

  const auto c = test::constant_image(10, 10, 1, 0.3);
  const auto cc = convolve_same(c, gaussian_kernel(5, 1.0));
  for (double v : cc.values()) CHECK(v == doctest::Approx(0.3).epsilon(1e-15));

  SUBCASE("5x5 ramp, 3x3 box, reflect border: nested-loop oracle") {
    ImageTensor ramp(5, 5, 1);
    for (int y = 0; y < 5; ++y)
      for (int x = 0; x < 5; ++x) ramp.at(y, x) = (5 * y + x) / 24.0;
    const auto out = convolve_same(ramp, box_kernel(3), BorderMode::reflect);
    auto refl = [](int i) { return i < 0 ? -i - 1 : (i >= 5 ? 9 - i : i); };
    for (int y = 0; y < 5; ++y)
      for (int x = 0; x < 5; ++x) {
        double s = 0.0;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) s += ramp.at(refl(y + dy), refl(x + dx)) / 9.0;
        CHECK(out.at(y, x) == doctest::Approx(s).epsilon(1e-14));
      }
  }

  SUBCASE("separable path agrees with the reference nested loop") {
    for (auto border : {BorderMode::reflect, BorderMode::replicate}) {
      const auto a = convolve_same(img, gaussian_kernel(7, 1.2), border);
      const auto b = reference::convolve_same(img, gaussian_kernel(7, 1.2), border);
      CHECK(rms_diff(a, b) < 1e-14);
    }
  }

  CHECK_THROWS_AS(convolve_same(test::noise_image(4, 4, 1, 1), gaussian_kernel(7, 1.0)), InvalidArgument);
}

TEST_CASE("downsample2") {
  const ImageTensor a(2, 2, 1, std::vector<double>{0, 1, 1, 0});
  const auto d = downsample2(a);
  REQUIRE(d.height() == 1);
  CHECK(d.at(0, 0) == 0.5);

  const auto c = downsample2(test::constant_image(7, 9, 3, 0.25));
  CHECK(c.height() == 3);
  CHECK(c.width() == 4);
  for (double v : c.values()) CHECK(v == 0.25);

  ImageTensor checker(4, 4, 1);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) checker.at(y, x) = (x + y) % 2;
  const auto dc = downsample2(checker);
  for (double v : dc.values()) CHECK(v == 0.5);

  const auto img = test::noise_image(15, 10, 3, 8);
  CHECK(downsample2(img) == reference::downsample2(img));
  CHECK_THROWS_AS(downsample2(test::noise_image(1, 5, 1, 1)), InvalidArgument);
}

TEST_CASE("laplacian pyramid") {
  const auto img = test::noise_image(64, 64, 1, 11);
  const auto one = laplacian_pyramid(img, 1);
  REQUIRE(one.size() == 1);
  CHECK(one[0] == img);

  const auto bands = laplacian_pyramid(img, 4);
  REQUIRE(bands.size() == 4);
  CHECK(bands[3].height() == 8);
  CHECK(rms_diff(reconstruct_pyramid(bands), img) < 1e-6);

  const auto flat = laplacian_pyramid(test::constant_image(32, 32, 1, 0.6), 3);
  for (std::size_t l = 0; l + 1 < flat.size(); ++l)
    for (double v : flat[l].values()) CHECK(std::abs(v) < 1e-12);
  for (double v : flat.back().values()) CHECK(v == doctest::Approx(0.6).epsilon(1e-12));

  CHECK(max_pyramid_levels(64, 64) == 5);
  CHECK_THROWS_AS(laplacian_pyramid(img, 6), InvalidArgument);

  for (int seed = 0; seed < 5; ++seed) {
    const auto t = test::textured_image(48 + seed * 7, 40 + seed * 5, 3, seed);
    const int levels = max_pyramid_levels(t.height(), t.width());
    CHECK(rms_diff(reconstruct_pyramid(laplacian_pyramid(t, levels)), t) < 1e-6);
  }
}
