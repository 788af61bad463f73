#include <cmath>

#include "mmf/common/error.hpp"
#include "mmf/metrics/constants.hpp"
#include "mmf/metrics/metrics.hpp"

namespace mmf::metrics {

double psnr(const ImageTensor& a, const ImageTensor& b) {
  imgio::require_same_shape(a, b, "psnr");
  auto pa = a.values();
  auto pb = b.values();
  double acc = 0.0;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    const double d = pa[i] - pb[i];
    acc += d * d;
  }
  const double mse = acc / static_cast<double>(pa.size());
  if (mse < constants::kPsnrMinMse) return constants::kPsnrCapDb;
  return std::min(constants::kPsnrCapDb, 10.0 * std::log10(1.0 / mse));
}

double mae(const ImageTensor& a, const ImageTensor& b, MaeScale scale) {
  imgio::require_same_shape(a, b, "mae");
  auto pa = a.values();
  auto pb = b.values();
  double acc = 0.0;
  for (std::size_t i = 0; i < pa.size(); ++i) acc += std::abs(pa[i] - pb[i]);
  const double m = acc / static_cast<double>(pa.size());
  return scale == MaeScale::byte ? m * 255.0 : m;
}

double total_variation(const ImageTensor& img) {
  const int h = img.height();
  const int w = img.width();
  double total = 0.0;
  for (int c = 0; c < img.channels(); ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const double v = img.at(y, x, c);
        const double dh = x + 1 < w ? img.at(y, x + 1, c) - v : 0.0;
        const double dv = y + 1 < h ? img.at(y + 1, x, c) - v : 0.0;
        total += std::sqrt(dh * dh + dv * dv);
      }
  return total;
}

double tv_ratio(const ImageTensor& a, const ImageTensor& b) {
  imgio::require_same_shape(a, b, "tv_ratio");
  const double ta = total_variation(a);
  const double tb = total_variation(b);
  if (ta < constants::kTvEps && tb < constants::kTvEps) return 1.0;
  return ta / (tb + constants::kTvEps);
}

}  // namespace mmf::metrics
