#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "mmf/common/error.hpp"
#include "mmf/deepsim/extractor.hpp"
#include "mmf/imgio/image.hpp"
#include "mmf/metrics/registry.hpp"

namespace mmf::metrics {

// Raised when one or more metrics fail on a pair; no partial output is kept.
class BatteryError : public InvalidArgument {
 public:
  BatteryError(std::string pair_id, std::vector<std::pair<std::string, std::string>> failures);
  const std::vector<std::pair<std::string, std::string>>& failures() const { return failures_; }

 private:
  std::vector<std::pair<std::string, std::string>> failures_;
};

// Computes one registered metric. `a` is the reference/source for the
// asymmetric metrics (tv_ratio, vif_s). Unimplemented descriptors raise
// NotImplemented.
double compute_metric(std::string_view name, const imgio::ImageTensor& a, const imgio::ImageTensor& b,
                      const deepsim::FeatureExtractor& fx);

// One score per metric of the tier, registry order. Deep features are
// extracted once per image and shared by lpips and dists. Grayscale inputs
// are replicated to RGB for the colour metrics.
std::vector<MetricScore> compute_battery(const imgio::ImageTensor& a, const imgio::ImageTensor& b,
                                         BatteryTier tier, const deepsim::FeatureExtractor& fx,
                                         const std::string& pair_id = {});

}  // namespace mmf::metrics
