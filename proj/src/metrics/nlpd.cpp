#include <algorithm>
#include <cmath>

#include "mmf/common/error.hpp"
#include "mmf/imgio/signal.hpp"
#include "mmf/metrics/constants.hpp"
#include "mmf/metrics/metrics.hpp"

namespace mmf::metrics {
namespace {

const imgio::Kernel2D& neighbourhood() {
  static const imgio::Kernel2D k = imgio::Kernel2D::separable({0.25, 0.5, 0.25}, {0.25, 0.5, 0.25}, true);
  return k;
}

// Divisive normalization: coefficient / (sigma0 + weighted local mean |coefficient|).
ImageTensor normalize_band(const ImageTensor& band) {
  ImageTensor magnitude = band;
  for (double& v : magnitude.values()) v = std::abs(v);
  const ImageTensor local = imgio::convolve_same(magnitude, neighbourhood());
  ImageTensor out = band;
  auto o = out.values();
  auto l = local.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] /= constants::kNlpdSigma0 + l[i];
  return out;
}

}  // namespace

double nlpd(const ImageTensor& a, const ImageTensor& b) {
  imgio::require_same_shape(a, b, "nlpd");
  if (a.height() < constants::kMinSideNlpd || a.width() < constants::kMinSideNlpd)
    throw InvalidArgument("nlpd: image must be at least 32x32");
  const int levels =
      std::min(constants::kNlpdLevels, imgio::max_pyramid_levels(a.height(), a.width()));
  if (levels < constants::kNlpdMinLevels) throw InvalidArgument("nlpd: image too small for 3 levels");

  const auto pa = imgio::laplacian_pyramid(imgio::to_grayscale(a), levels);
  const auto pb = imgio::laplacian_pyramid(imgio::to_grayscale(b), levels);
  double total = 0.0;
  for (int l = 0; l < levels; ++l) {
    const ImageTensor na = normalize_band(pa[l]);
    const ImageTensor nb = normalize_band(pb[l]);
    auto va = na.values();
    auto vb = nb.values();
    double acc = 0.0;
    for (std::size_t i = 0; i < va.size(); ++i) {
      const double d = va[i] - vb[i];
      acc += d * d;
    }
    total += std::sqrt(acc / static_cast<double>(va.size()));
  }
  return total / levels;
}

}  // namespace mmf::metrics
