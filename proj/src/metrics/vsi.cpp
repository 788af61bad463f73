#include <algorithm>
#include <cmath>
#include <numbers>

#include "mmf/common/error.hpp"
#include "mmf/imgio/fft.hpp"
#include "mmf/metrics/constants.hpp"
#include "mmf/metrics/detail.hpp"
#include "mmf/metrics/metrics.hpp"

namespace mmf::metrics {
namespace {

namespace c = constants;

struct Lab {
  std::vector<double> l, a, b;
};

// Byte-scale sRGB -> CIELAB with the D50-style white point of the
// reference saliency code.
Lab rgb_to_lab(const ImageTensor& rgb255) {
  const std::size_t n = rgb255.pixel_count();
  Lab lab{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
  auto src = rgb255.values();
  auto linear = [](double v) { return v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4); };
  auto f = [](double t) { return t > 0.008856 ? std::cbrt(t) : (903.3 * t + 16.0) / 116.0; };
  for (std::size_t i = 0; i < n; ++i) {
    const double r = linear(src[3 * i] / 255.0);
    const double g = linear(src[3 * i + 1] / 255.0);
    const double b = linear(src[3 * i + 2] / 255.0);
    const double x = r * 0.4124564 + g * 0.3575761 + b * 0.1804375;
    const double y = r * 0.2126729 + g * 0.7151522 + b * 0.0721750;
    const double z = r * 0.0193339 + g * 0.1191920 + b * 0.9503041;
    const double fx = f(x / 0.9642);
    const double fy = f(y / 1.0);
    const double fz = f(z / 0.8251);
    lab.l[i] = 116.0 * fy - 16.0;
    lab.a[i] = 500.0 * (fx - fy);
    lab.b[i] = 200.0 * (fy - fz);
  }
  return lab;
}

std::vector<double> log_gabor_band(int rows, int cols) {
  const auto grid = detail::frequency_grid(rows, cols);
  std::vector<double> lg(grid.u.size());
  for (std::size_t i = 0; i < lg.size(); ++i) {
    const double r = std::sqrt(grid.u[i] * grid.u[i] + grid.v[i] * grid.v[i]);
    if (i == 0 || r > 0.5) {
      lg[i] = 0.0;
      continue;
    }
    const double lr = std::log(r / c::kVsiOmega0);
    lg[i] = std::exp(-(lr * lr) / (2.0 * c::kVsiSigmaF * c::kVsiSigmaF));
  }
  return lg;
}

std::vector<double> band_pass(const std::vector<double>& plane, const std::vector<double>& lg, int rows,
                              int cols) {
  auto spectrum = imgio::fft2(imgio::ComplexGrid(plane.begin(), plane.end()), rows, cols);
  for (std::size_t i = 0; i < spectrum.size(); ++i) spectrum[i] *= lg[i];
  const auto filtered = imgio::ifft2(spectrum, rows, cols);
  std::vector<double> out(plane.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = filtered[i].real();
  return out;
}

std::vector<double> min_max_normalized(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  std::vector<double> out(v.size(), 0.0);
  if (*hi - *lo <= 0.0) return out;
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - *lo) / (*hi - *lo);
  return out;
}

bool achromatic(const ImageTensor& img) {
  if (img.channels() == 1) return true;
  auto p = img.values();
  for (std::size_t i = 0; i < img.pixel_count(); ++i)
    if (p[3 * i] != p[3 * i + 1] || p[3 * i] != p[3 * i + 2]) return false;
  return true;
}

}  // namespace

ImageTensor sdsp_saliency(const ImageTensor& rgb255) {
  if (rgb255.channels() != 3) throw InvalidArgument("sdsp_saliency: expected RGB");
  const int rows = rgb255.height();
  const int cols = rgb255.width();
  const std::size_t n = rgb255.pixel_count();
  const Lab lab = rgb_to_lab(rgb255);
  const auto lg = log_gabor_band(rows, cols);
  const auto fl = band_pass(lab.l, lg, rows, cols);
  const auto fa = band_pass(lab.a, lg, rows, cols);
  const auto fb = band_pass(lab.b, lg, rows, cols);
  const auto na = min_max_normalized(lab.a);
  const auto nb = min_max_normalized(lab.b);

  // Centre prior in the reference 256x256 coordinate frame.
  const double cy = rows / 2.0;
  const double cx = cols / 2.0;
  const double sy = 256.0 / rows;
  const double sx = 256.0 / cols;
  std::vector<double> vs(n);
  for (int y = 0; y < rows; ++y)
    for (int x = 0; x < cols; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * cols + x;
      const double sf = std::sqrt(fl[i] * fl[i] + fa[i] * fa[i] + fb[i] * fb[i]);
      const double dy = (y + 1 - cy) * sy;
      const double dx = (x + 1 - cx) * sx;
      const double center = std::exp(-(dy * dy + dx * dx) / (c::kVsiSigmaD * c::kVsiSigmaD));
      const double dist2 = na[i] * na[i] + nb[i] * nb[i];
      const double color = 1.0 - std::exp(-dist2 / (c::kVsiSigmaC * c::kVsiSigmaC));
      vs[i] = sf * center * color;
    }
  return ImageTensor(rows, cols, 1, min_max_normalized(vs));
}

double vsi(const ImageTensor& a, const ImageTensor& b) {
  imgio::require_same_shape(a, b, "vsi");
  if (a.height() < c::kMinSideVsi || a.width() < c::kMinSideVsi)
    throw InvalidArgument("vsi: image must be at least 64x64");
  const bool gray_pair = achromatic(a) && achromatic(b);
  const ImageTensor ra = detail::reference_downsample(imgio::gray_to_rgb(a).scaled(255.0));
  const ImageTensor rb = detail::reference_downsample(imgio::gray_to_rgb(b).scaled(255.0));
  const ImageTensor sal_a = sdsp_saliency(ra);
  const ImageTensor sal_b = sdsp_saliency(rb);

  const std::size_t n = ra.pixel_count();
  auto opponent = [n](const ImageTensor& rgb, ImageTensor& l, std::vector<double>& m, std::vector<double>& nn) {
    auto p = rgb.values();
    auto lv = l.values();
    for (std::size_t i = 0; i < n; ++i) {
      const double r = p[3 * i], g = p[3 * i + 1], bl = p[3 * i + 2];
      lv[i] = 0.06 * r + 0.63 * g + 0.27 * bl;
      m[i] = 0.30 * r + 0.04 * g - 0.35 * bl;
      nn[i] = 0.34 * r - 0.60 * g + 0.17 * bl;
    }
  };
  ImageTensor la(ra.height(), ra.width(), 1), lb(rb.height(), rb.width(), 1);
  std::vector<double> ma(n), mb(n), na(n), nb(n);
  opponent(ra, la, ma, na);
  opponent(rb, lb, mb, nb);
  const ImageTensor ga = detail::scharr_magnitude(la);
  const ImageTensor gb = detail::scharr_magnitude(lb);

  auto s1 = sal_a.values();
  auto s2 = sal_b.values();
  auto g1 = ga.values();
  auto g2 = gb.values();
  double weight_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) weight_sum += std::max(s1[i], s2[i]);
  const bool uniform = weight_sum <= 0.0;

  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double vs_sim = (2.0 * s1[i] * s2[i] + c::kVsiConstVs) / (s1[i] * s1[i] + s2[i] * s2[i] + c::kVsiConstVs);
    const double g_sim = (2.0 * g1[i] * g2[i] + c::kVsiConstGm) / (g1[i] * g1[i] + g2[i] * g2[i] + c::kVsiConstGm);
    double chroma = 1.0;
    if (!gray_pair) {
      const double i_sim = (2.0 * ma[i] * mb[i] + c::kVsiConstChrom) / (ma[i] * ma[i] + mb[i] * mb[i] + c::kVsiConstChrom);
      const double q_sim = (2.0 * na[i] * nb[i] + c::kVsiConstChrom) / (na[i] * na[i] + nb[i] * nb[i] + c::kVsiConstChrom);
      const double iq = i_sim * q_sim;
      // Real part of a possibly negative base raised to a fractional power.
      chroma = iq >= 0.0 ? std::pow(iq, c::kVsiLambda)
                         : std::pow(-iq, c::kVsiLambda) * std::cos(c::kVsiLambda * std::numbers::pi);
    }
    const double w = uniform ? 1.0 : std::max(s1[i], s2[i]);
    num += std::pow(g_sim, c::kVsiAlpha) * vs_sim * chroma * w;
    den += w;
  }
  return num / den;
}

}  // namespace mmf::metrics
