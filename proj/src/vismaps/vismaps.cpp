#include "mmf/vismaps/vismaps.hpp"

#include <algorithm>
#include <cmath>

#include "mmf/common/error.hpp"
#include "mmf/imgio/codec.hpp"
#include "mmf/metrics/metrics.hpp"

namespace mmf::vismaps {

using imgio::ImageTensor;

namespace {

ImageTensor gradient_magnitude(const ImageTensor& img) {
  const int h = img.height(), w = img.width();
  ImageTensor g(h, w, 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int c = 0; c < img.channels(); ++c) {
        const double v = img.at(y, x, c);
        const double dh = x + 1 < w ? img.at(y, x + 1, c) - v : 0.0;
        const double dv = y + 1 < h ? img.at(y + 1, x, c) - v : 0.0;
        s += std::sqrt(dh * dh + dv * dv);
      }
      g.at(y, x) = s;
    }
  return g;
}

}  // namespace

ErrorMap ssim_map(const ImageTensor& a, const ImageTensor& b) {
  ImageTensor m = metrics::ssim_index_map(a, b);
  for (double& v : m.values()) v = std::clamp(1.0 - v, 0.0, 1.0);
  return {std::move(m), "ssim", {}};
}

ErrorMap mae_map(const ImageTensor& a, const ImageTensor& b) {
  imgio::require_same_shape(a, b, "mae_map");
  ImageTensor m(a.height(), a.width(), 1);
  for (int y = 0; y < a.height(); ++y)
    for (int x = 0; x < a.width(); ++x) {
      double s = 0.0;
      for (int c = 0; c < a.channels(); ++c) s += std::abs(a.at(y, x, c) - b.at(y, x, c));
      m.at(y, x) = std::clamp(s / a.channels(), 0.0, 1.0);
    }
  return {std::move(m), "mae", {}};
}

ErrorMap tv_ratio_map(const ImageTensor& a, const ImageTensor& b) {
  imgio::require_same_shape(a, b, "tv_ratio_map");
  const ImageTensor ga = gradient_magnitude(a);
  const ImageTensor gb = gradient_magnitude(b);
  ImageTensor m(a.height(), a.width(), 1);
  auto out = m.values();
  auto va = ga.values();
  auto vb = gb.values();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double r = (vb[i] + kLocalTvEps) / (va[i] + kLocalTvEps);
    out[i] = std::clamp(1.0 - r, 0.0, 1.0);
  }
  return {std::move(m), "tv_ratio", {}};
}

const std::vector<std::string>& map_names() {
  static const std::vector<std::string> names{"ssim", "mae", "tv_ratio"};
  return names;
}

ErrorMap compute_map(std::string_view metric, const ImageTensor& a, const ImageTensor& b) {
  if (metric == "ssim") return ssim_map(a, b);
  if (metric == "mae") return mae_map(a, b);
  if (metric == "tv_ratio") return tv_ratio_map(a, b);
  throw InvalidArgument("no visibility map for metric '" + std::string(metric) + "' (expected ssim, mae or tv_ratio)");
}

void write_map(const ErrorMap& map, const std::filesystem::path& path) {
  if (map.values.channels() != 1) throw InvalidArgument("error map must be single-channel");
  ImageTensor img = map.values;
  for (double& v : img.values()) {
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument("error map value outside [0,1]");
    v = 1.0 - v;
  }
  imgio::encode_png(img, path);
}

}  // namespace mmf::vismaps
