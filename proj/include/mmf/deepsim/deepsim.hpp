#pragma once

#include <vector>

#include "mmf/deepsim/extractor.hpp"
#include "mmf/imgio/image.hpp"

namespace mmf::deepsim {

inline constexpr double kDistsC1 = 1e-6;
inline constexpr double kDistsC2 = 1e-6;
inline constexpr double kLpipsEps = 1e-10;

// Per-channel spatial statistics of one stage for an image pair.
struct StageStatistics {
  std::vector<double> mean_a, mean_b;
  std::vector<double> var_a, var_b;
  std::vector<double> cov;
};

StageStatistics stage_statistics(const FeatureMap& a, const FeatureMap& b);

// 1 - sum over stages and channels of (alpha*t + beta*s), clamped to [0,1].
// alpha = beta = 0.5/total_channels unless the extractor ships weights.
double dists(const imgio::ImageTensor& a, const imgio::ImageTensor& b, const FeatureExtractor& fx);
double dists_from_features(const std::vector<FeatureMap>& fa, const std::vector<FeatureMap>& fb,
                           const FeatureExtractor& fx);

// Unclamped value of 1 - similarity; used to audit clamp violations.
double dists_raw_from_features(const std::vector<FeatureMap>& fa, const std::vector<FeatureMap>& fb,
                               const FeatureExtractor& fx);

// Mean over conv stages of the mean squared difference between
// channel-normalized feature vectors.
double lpips_like(const imgio::ImageTensor& a, const imgio::ImageTensor& b, const FeatureExtractor& fx);
double lpips_from_features(const std::vector<FeatureMap>& fa, const std::vector<FeatureMap>& fb);

}  // namespace mmf::deepsim
