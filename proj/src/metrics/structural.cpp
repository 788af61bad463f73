#include <algorithm>
#include <cmath>
#include <string>

#include "mmf/common/error.hpp"
#include "mmf/imgio/signal.hpp"
#include "mmf/metrics/constants.hpp"
#include "mmf/metrics/metrics.hpp"

namespace mmf::metrics {
namespace {

using imgio::convolve_same;
using imgio::Kernel2D;

const Kernel2D& ssim_window() {
  static const Kernel2D k = imgio::gaussian_kernel(constants::kSsimWindow, constants::kSsimSigma);
  return k;
}

struct SsimMaps {
  ImageTensor luminance;  // l term per pixel
  ImageTensor cs;         // contrast-structure term per pixel
};

// Local Gaussian-window statistics of two grayscale images.
SsimMaps ssim_terms(const ImageTensor& a, const ImageTensor& b) {
  if (a.height() < constants::kSsimWindow || a.width() < constants::kSsimWindow)
    throw InvalidArgument("ssim: image smaller than the " + std::to_string(constants::kSsimWindow) +
                          "-pixel window");
  const auto& k = ssim_window();
  const ImageTensor mu_a = convolve_same(a, k);
  const ImageTensor mu_b = convolve_same(b, k);
  const ImageTensor e_aa = convolve_same(imgio::multiply(a, a), k);
  const ImageTensor e_bb = convolve_same(imgio::multiply(b, b), k);
  const ImageTensor e_ab = convolve_same(imgio::multiply(a, b), k);

  SsimMaps out{ImageTensor(a.height(), a.width(), 1), ImageTensor(a.height(), a.width(), 1)};
  auto ma = mu_a.values();
  auto mb = mu_b.values();
  auto aa = e_aa.values();
  auto bb = e_bb.values();
  auto ab = e_ab.values();
  auto lum = out.luminance.values();
  auto cs = out.cs.values();
  for (std::size_t i = 0; i < lum.size(); ++i) {
    const double va = aa[i] - ma[i] * ma[i];
    const double vb = bb[i] - mb[i] * mb[i];
    const double cov = ab[i] - ma[i] * mb[i];
    lum[i] = (2.0 * ma[i] * mb[i] + constants::kSsimC1) /
             (ma[i] * ma[i] + mb[i] * mb[i] + constants::kSsimC1);
    cs[i] = (2.0 * cov + constants::kSsimC2) / (va + vb + constants::kSsimC2);
  }
  return out;
}

double mean_of(const ImageTensor& img) {
  double acc = 0.0;
  for (double v : img.values()) acc += v;
  return acc / static_cast<double>(img.size());
}

const Kernel2D& prewitt_x() {
  static const Kernel2D k = Kernel2D::separable({1.0 / 3, 1.0 / 3, 1.0 / 3}, {1.0, 0.0, -1.0});
  return k;
}

const Kernel2D& prewitt_y() {
  static const Kernel2D k = Kernel2D::separable({1.0, 0.0, -1.0}, {1.0 / 3, 1.0 / 3, 1.0 / 3});
  return k;
}

ImageTensor gradient_magnitude(const ImageTensor& gray) {
  const ImageTensor gx = convolve_same(gray, prewitt_x());
  const ImageTensor gy = convolve_same(gray, prewitt_y());
  ImageTensor out(gray.height(), gray.width(), 1);
  auto px = gx.values();
  auto py = gy.values();
  auto o = out.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = std::sqrt(px[i] * px[i] + py[i] * py[i]);
  return out;
}

}  // namespace

ImageTensor ssim_index_map(const ImageTensor& a, const ImageTensor& b) {
  imgio::require_same_shape(a, b, "ssim");
  SsimMaps t = ssim_terms(imgio::to_grayscale(a), imgio::to_grayscale(b));
  auto lum = t.luminance.values();
  auto cs = t.cs.values();
  for (std::size_t i = 0; i < lum.size(); ++i) lum[i] *= cs[i];
  return t.luminance;
}

double ssim(const ImageTensor& a, const ImageTensor& b) { return mean_of(ssim_index_map(a, b)); }

int ms_ssim_scales(int height, int width) {
  int scales = 0;
  int side = std::min(height, width);
  while (scales < static_cast<int>(constants::kMsSsimWeights.size()) && side >= constants::kSsimWindow) {
    ++scales;
    side /= 2;
  }
  return scales;
}

double ms_ssim(const ImageTensor& a, const ImageTensor& b) {
  imgio::require_same_shape(a, b, "ms_ssim");
  const int scales = ms_ssim_scales(a.height(), a.width());
  if (scales == 0) throw InvalidArgument("ms_ssim: image smaller than the SSIM window");
  double weight_sum = 0.0;
  for (int s = 0; s < scales; ++s) weight_sum += constants::kMsSsimWeights[s];

  ImageTensor ga = imgio::to_grayscale(a);
  ImageTensor gb = imgio::to_grayscale(b);
  double result = 1.0;
  for (int s = 0; s < scales; ++s) {
    const double w = constants::kMsSsimWeights[s] / weight_sum;
    SsimMaps t = ssim_terms(ga, gb);
    double value;
    if (s + 1 == scales) {
      auto lum = t.luminance.values();
      auto cs = t.cs.values();
      for (std::size_t i = 0; i < lum.size(); ++i) lum[i] *= cs[i];
      value = mean_of(t.luminance);
    } else {
      value = mean_of(t.cs);
      ga = imgio::downsample2(ga);
      gb = imgio::downsample2(gb);
    }
    // Negative terms would make the fractional power undefined.
    result *= std::pow(std::max(value, 0.0), w);
  }
  return result;
}

ImageTensor gms_map(const ImageTensor& a, const ImageTensor& b) {
  imgio::require_same_shape(a, b, "gmsd");
  if (a.height() < 6 || a.width() < 6) throw InvalidArgument("gmsd: image must be at least 6x6");
  const ImageTensor ga = gradient_magnitude(imgio::downsample2(imgio::to_grayscale(a)));
  const ImageTensor gb = gradient_magnitude(imgio::downsample2(imgio::to_grayscale(b)));
  ImageTensor out(ga.height(), ga.width(), 1);
  auto pa = ga.values();
  auto pb = gb.values();
  auto o = out.values();
  for (std::size_t i = 0; i < o.size(); ++i)
    o[i] = (2.0 * pa[i] * pb[i] + constants::kGmsdC) / (pa[i] * pa[i] + pb[i] * pb[i] + constants::kGmsdC);
  return out;
}

double gmsd(const ImageTensor& a, const ImageTensor& b) {
  const ImageTensor map = gms_map(a, b);
  const double mean = mean_of(map);
  double acc = 0.0;
  for (double v : map.values()) acc += (v - mean) * (v - mean);
  return std::sqrt(acc / static_cast<double>(map.size()));
}

}  // namespace mmf::metrics
