#include "mmf/deepsim/deepsim.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "mmf/common/error.hpp"

namespace mmf::deepsim {
namespace {

void check_pair(const imgio::ImageTensor& a, const imgio::ImageTensor& b) {
  imgio::require_same_shape(a, b, "deepsim");
}

void check_features(const std::vector<FeatureMap>& fa, const std::vector<FeatureMap>& fb) {
  if (fa.size() != fb.size()) throw InvalidArgument("deepsim: feature stacks differ in depth");
  for (std::size_t j = 0; j < fa.size(); ++j)
    if (fa[j].channels != fb[j].channels || fa[j].height != fb[j].height || fa[j].width != fb[j].width)
      throw InvalidArgument("deepsim: feature maps differ in shape");
}

}  // namespace

StageStatistics stage_statistics(const FeatureMap& a, const FeatureMap& b) {
  StageStatistics st;
  const auto n = static_cast<double>(a.height) * a.width;
  for (int c = 0; c < a.channels; ++c) {
    const auto pa = a.plane(c);
    const auto pb = b.plane(c);
    double sa = 0.0, sb = 0.0;
    for (std::size_t i = 0; i < pa.size(); ++i) {
      sa += pa[i];
      sb += pb[i];
    }
    const double ma = sa / n;
    const double mb = sb / n;
    double va = 0.0, vb = 0.0, cv = 0.0;
    for (std::size_t i = 0; i < pa.size(); ++i) {
      const double da = pa[i] - ma;
      const double db = pb[i] - mb;
      va += da * da;
      vb += db * db;
      cv += da * db;
    }
    st.mean_a.push_back(ma);
    st.mean_b.push_back(mb);
    st.var_a.push_back(va / n);
    st.var_b.push_back(vb / n);
    st.cov.push_back(cv / n);
  }
  return st;
}

double dists_raw_from_features(const std::vector<FeatureMap>& fa, const std::vector<FeatureMap>& fb,
                               const FeatureExtractor& fx) {
  check_features(fa, fb);
  const double uniform = 0.5 / fx.total_channels();
  double similarity = 0.0;
  std::size_t k = 0;
  for (std::size_t j = 0; j < fa.size(); ++j) {
    const StageStatistics st = stage_statistics(fa[j], fb[j]);
    for (std::size_t c = 0; c < st.mean_a.size(); ++c, ++k) {
      const double t = (2.0 * st.mean_a[c] * st.mean_b[c] + kDistsC1) /
                       (st.mean_a[c] * st.mean_a[c] + st.mean_b[c] * st.mean_b[c] + kDistsC1);
      const double s = (2.0 * st.cov[c] + kDistsC2) / (st.var_a[c] + st.var_b[c] + kDistsC2);
      const double alpha = fx.channel_weights ? fx.channel_weights->alpha[k] : uniform;
      const double beta = fx.channel_weights ? fx.channel_weights->beta[k] : uniform;
      similarity += alpha * t + beta * s;
    }
  }
  return 1.0 - similarity;
}

double dists_from_features(const std::vector<FeatureMap>& fa, const std::vector<FeatureMap>& fb,
                           const FeatureExtractor& fx) {
  const double raw = dists_raw_from_features(fa, fb, fx);
  if (raw < -1e-9 || raw > 1.0 + 1e-9)
    std::clog << "dists: pre-clamp value " << raw << " outside [0,1]\n";
  return std::clamp(raw, 0.0, 1.0);
}

double dists(const imgio::ImageTensor& a, const imgio::ImageTensor& b, const FeatureExtractor& fx) {
  check_pair(a, b);
  return dists_from_features(extract(fx, a), extract(fx, b), fx);
}

double lpips_from_features(const std::vector<FeatureMap>& fa, const std::vector<FeatureMap>& fb) {
  check_features(fa, fb);
  if (fa.size() < 2) throw InvalidArgument("lpips: no conv stages");
  double total = 0.0;
  for (std::size_t j = 1; j < fa.size(); ++j) {
    const auto& ma = fa[j];
    const auto& mb = fb[j];
    const std::size_t n = static_cast<std::size_t>(ma.height) * ma.width;
    std::vector<double> norm_a(n, 0.0), norm_b(n, 0.0);
    for (int c = 0; c < ma.channels; ++c) {
      const auto pa = ma.plane(c);
      const auto pb = mb.plane(c);
      for (std::size_t i = 0; i < n; ++i) {
        norm_a[i] += double(pa[i]) * pa[i];
        norm_b[i] += double(pb[i]) * pb[i];
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      norm_a[i] = 1.0 / (std::sqrt(norm_a[i]) + kLpipsEps);
      norm_b[i] = 1.0 / (std::sqrt(norm_b[i]) + kLpipsEps);
    }
    double acc = 0.0;
    for (int c = 0; c < ma.channels; ++c) {
      const auto pa = ma.plane(c);
      const auto pb = mb.plane(c);
      for (std::size_t i = 0; i < n; ++i) {
        const double d = pa[i] * norm_a[i] - pb[i] * norm_b[i];
        acc += d * d;
      }
    }
    total += acc / (static_cast<double>(n) * ma.channels);
  }
  return total / static_cast<double>(fa.size() - 1);
}

double lpips_like(const imgio::ImageTensor& a, const imgio::ImageTensor& b, const FeatureExtractor& fx) {
  check_pair(a, b);
  return lpips_from_features(extract(fx, a), extract(fx, b));
}

}  // namespace mmf::deepsim
