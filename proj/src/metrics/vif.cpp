#include <algorithm>
#include <cmath>

#include "mmf/common/error.hpp"
#include "mmf/imgio/signal.hpp"
#include "mmf/metrics/constants.hpp"
#include "mmf/metrics/metrics.hpp"

namespace mmf::metrics {

double vif_spatial(const ImageTensor& a, const ImageTensor& b) {
  imgio::require_same_shape(a, b, "vif_s");
  if (a.height() < constants::kMinSideVif || a.width() < constants::kMinSideVif)
    throw InvalidArgument("vif_s: image must be at least 64x64");

  const auto window = imgio::box_kernel(constants::kVifWindow);
  ImageTensor ref = imgio::to_grayscale(a);
  ImageTensor dist = imgio::to_grayscale(b);
  double num = 0.0;
  double den = 0.0;
  for (int scale = 0; scale < constants::kVifScales; ++scale) {
    if (scale > 0) {
      ref = imgio::downsample2(imgio::convolve_same(ref, imgio::pyramid_blur()));
      dist = imgio::downsample2(imgio::convolve_same(dist, imgio::pyramid_blur()));
    }
    const ImageTensor mu_a = imgio::convolve_same(ref, window);
    const ImageTensor mu_b = imgio::convolve_same(dist, window);
    const ImageTensor e_aa = imgio::convolve_same(imgio::multiply(ref, ref), window);
    const ImageTensor e_bb = imgio::convolve_same(imgio::multiply(dist, dist), window);
    const ImageTensor e_ab = imgio::convolve_same(imgio::multiply(ref, dist), window);
    auto ma = mu_a.values();
    auto mb = mu_b.values();
    auto aa = e_aa.values();
    auto bb = e_bb.values();
    auto ab = e_ab.values();
    for (std::size_t i = 0; i < ma.size(); ++i) {
      const double var_a = std::max(aa[i] - ma[i] * ma[i], 0.0);
      const double var_b = std::max(bb[i] - mb[i] * mb[i], 0.0);
      const double cov = ab[i] - ma[i] * mb[i];
      const double gain = var_a < constants::kVifGainEps ? 0.0 : cov / var_a;
      const double var_v = std::max(var_b - gain * cov, 0.0);
      num += std::log2(1.0 + gain * gain * var_a / (var_v + constants::kVifNoiseVar));
      den += std::log2(1.0 + var_a / constants::kVifNoiseVar);
    }
  }
  // Flat reference: no information to preserve.
  if (den < 1e-12) return 1.0;
  return num / den;
}

}  // namespace mmf::metrics
