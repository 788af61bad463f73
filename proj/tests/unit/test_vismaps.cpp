#include <cmath>

#include <doctest.h>

#include "mmf/common/error.hpp"
#include "mmf/imgio/codec.hpp"
#include "mmf/imgio/signal.hpp"
#include "mmf/metrics/metrics.hpp"
#include "mmf/vismaps/vismaps.hpp"
#include "support.hpp"

using namespace mmf;
using imgio::ImageTensor;

namespace {

double map_mean(const vismaps::ErrorMap& m) {
  double s = 0;
  for (double v : m.values.values()) s += v;
  return s / static_cast<double>(m.values.values().size());
}

}  // namespace

TEST_CASE("identical inputs give all-zero maps") {
  const auto a = test::textured_image(48, 40, 3, 1);
  for (const auto& name : vismaps::map_names()) {
    const auto m = vismaps::compute_map(name, a, a);
    CHECK(m.metric == name);
    CHECK(m.values.height() == 48);
    CHECK(m.values.width() == 40);
    CHECK(m.values.channels() == 1);
    for (double v : m.values.values()) CHECK(std::abs(v) <= 1e-12);
  }
  CHECK_THROWS_AS(vismaps::compute_map("dists", a, a), InvalidArgument);
  CHECK_THROWS_AS(vismaps::mae_map(a, test::textured_image(48, 41, 3, 1)), InvalidArgument);
}

TEST_CASE("maps localise a perturbed patch") {
  const auto a = test::textured_image(64, 64, 3, 2);
  auto b = a;
  Rng rng(3);
  for (int y = 20; y < 40; ++y)
    for (int x = 24; x < 44; ++x)
      for (int c = 0; c < 3; ++c) b.at(y, x, c) = uniform01(rng);

  const int pad_ssim = 5;  // 11-tap window
  const auto s = vismaps::ssim_map(a, b);
  const auto m = vismaps::mae_map(a, b);
  const auto t = vismaps::tv_ratio_map(b, a);
  double inside = 0;
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x) {
      const bool in = y >= 20 && y < 40 && x >= 24 && x < 44;
      const bool near = y >= 20 - pad_ssim && y < 40 + pad_ssim && x >= 24 - pad_ssim && x < 44 + pad_ssim;
      if (!near) CHECK(s.values.at(y, x) <= 1e-12);
      if (!in) CHECK(m.values.at(y, x) == 0.0);
      // Forward differences reach one pixel up/left of the patch.
      if (!(y >= 19 && y < 40 && x >= 23 && x < 44)) CHECK(t.values.at(y, x) == 0.0);
      if (in) inside += s.values.at(y, x);
    }
  CHECK(inside / 400.0 > 0.3);
}

TEST_CASE("ssim map mean is one minus pooled ssim") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto a = test::textured_image(64, 80, 3, seed);
    auto b = a;
    Rng rng(seed + 100);
    for (double& v : b.values()) v = std::clamp(v + 0.03 * normal(rng), 0.0, 1.0);
    const auto idx = metrics::ssim_index_map(a, b);
    bool negative = false;
    for (double v : idx.values()) negative |= v < 0.0;
    REQUIRE_FALSE(negative);  // the clamp is inactive for mild noise
    CHECK(std::abs((1.0 - map_mean(vismaps::ssim_map(a, b))) - metrics::ssim(a, b)) <= 1e-9);
  }
}

TEST_CASE("mae map") {
  ImageTensor a(4, 4, 3, 0.5), b = a;
  b.at(1, 2, 0) = 1.0;  // one channel off by 0.5
  const auto m = vismaps::mae_map(a, b);
  CHECK(m.values.at(1, 2) == doctest::Approx(0.5 / 3.0));
  CHECK(m.values.at(0, 0) == 0.0);

  const auto x = test::noise_image(30, 20, 3, 4), y = test::noise_image(30, 20, 3, 5);
  CHECK(map_mean(vismaps::mae_map(x, y)) == doctest::Approx(metrics::mae(x, y, metrics::MaeScale::unit)).epsilon(1e-12));
}

TEST_CASE("tv ratio map marks blur but not sharpening") {
  const auto a = test::textured_image(64, 64, 3, 6);
  auto b = a;
  const auto k = imgio::gaussian_kernel(9, 2.0);
  const auto blurred = imgio::convolve_same(a, k);
  for (int y = 16; y < 48; ++y)
    for (int x = 16; x < 48; ++x)
      for (int c = 0; c < 3; ++c) b.at(y, x, c) = blurred.at(y, x, c);
  const auto m = vismaps::tv_ratio_map(a, b);
  double in = 0, out = 0;
  int nin = 0, nout = 0;
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x) {
      const bool inside = y >= 17 && y < 47 && x >= 17 && x < 47;
      if (inside) {
        in += m.values.at(y, x);
        ++nin;
      } else if (y < 15 || y >= 48 || x < 15 || x >= 48) {
        out += m.values.at(y, x);
        ++nout;
      }
    }
  CHECK(in / nin > 0.3);
  CHECK(out == 0.0);
  // Reference smoother than the candidate: little is flagged.
  CHECK(map_mean(vismaps::tv_ratio_map(blurred, a)) < 0.1 * map_mean(vismaps::tv_ratio_map(a, blurred)));
}

TEST_CASE("write_map") {
  test::TempDir dir("maps");
  const auto a = test::textured_image(16, 16, 3, 7);
  vismaps::write_map(vismaps::ssim_map(a, a), dir / "white.png");
  const auto white = imgio::decode(dir / "white.png");
  for (double v : white.values()) CHECK(v == 1.0);

  vismaps::ErrorMap full{ImageTensor(8, 8, 1, 1.0), "mae", "p"};
  vismaps::write_map(full, dir / "black.png");
  const auto black = imgio::decode(dir / "black.png");
  for (double v : black.values()) CHECK(v == 0.0);

  const auto m = vismaps::mae_map(test::noise_image(16, 16, 3, 8), test::noise_image(16, 16, 3, 9));
  vismaps::write_map(m, dir / "m.png");
  const auto back = imgio::decode(dir / "m.png");
  REQUIRE(back.channels() == 1);
  for (std::size_t i = 0; i < back.values().size(); ++i)
    CHECK(std::abs(back.values()[i] - (1.0 - m.values.values()[i])) <= 0.5 / 255.0 + 1e-12);

  vismaps::ErrorMap bad{ImageTensor(2, 2, 1, 1.5), "mae", "p"};
  CHECK_THROWS_AS(vismaps::write_map(bad, dir / "bad.png"), InvalidArgument);
  vismaps::ErrorMap rgb{ImageTensor(2, 2, 3, 0.5), "mae", "p"};
  CHECK_THROWS_AS(vismaps::write_map(rgb, dir / "rgb.png"), InvalidArgument);
}
