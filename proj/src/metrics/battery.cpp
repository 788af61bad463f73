#include "mmf/metrics/battery.hpp"

#include <cmath>
#include <optional>

#include "mmf/deepsim/deepsim.hpp"
#include "mmf/metrics/metrics.hpp"

namespace mmf::metrics {
namespace {

std::string describe(const std::string& pair_id,
                     const std::vector<std::pair<std::string, std::string>>& failures) {
  std::string msg = "metric battery failed";
  if (!pair_id.empty()) msg += " for pair '" + pair_id + "'";
  for (const auto& [name, what] : failures) msg += "; " + name + ": " + what;
  return msg;
}

double classical(std::string_view name, const imgio::ImageTensor& a, const imgio::ImageTensor& b) {
  if (name == "psnr") return psnr(a, b);
  if (name == "mae") return mae(a, b, MaeScale::byte);
  if (name == "tv_ratio") return tv_ratio(a, b);
  if (name == "ssim") return ssim(a, b);
  if (name == "ms_ssim") return ms_ssim(a, b);
  if (name == "gmsd") return gmsd(a, b);
  if (name == "nlpd") return nlpd(a, b);
  if (name == "vif_s") return vif_spatial(a, b);
  if (name == "fsim") return fsim(a, b);
  if (name == "vsi") return vsi(imgio::gray_to_rgb(a), imgio::gray_to_rgb(b));
  throw InvalidArgument("no classical implementation for metric " + std::string(name));
}

}  // namespace

BatteryError::BatteryError(std::string pair_id, std::vector<std::pair<std::string, std::string>> failures)
    : InvalidArgument(describe(pair_id, failures)), failures_(std::move(failures)) {}

double compute_metric(std::string_view name, const imgio::ImageTensor& a, const imgio::ImageTensor& b,
                      const deepsim::FeatureExtractor& fx) {
  const MetricDescriptor& d = descriptor(name);
  if (!d.implemented) throw NotImplemented("metric '" + d.name + "' is registered but not implemented");
  if (name == "dists") return deepsim::dists(imgio::gray_to_rgb(a), imgio::gray_to_rgb(b), fx);
  if (name == "lpips") return deepsim::lpips_like(imgio::gray_to_rgb(a), imgio::gray_to_rgb(b), fx);
  return classical(name, a, b);
}

std::vector<MetricScore> compute_battery(const imgio::ImageTensor& a, const imgio::ImageTensor& b,
                                         BatteryTier tier, const deepsim::FeatureExtractor& fx,
                                         const std::string& pair_id) {
  imgio::require_same_shape(a, b, "compute_battery");
  const auto names = battery_metrics(tier);
  std::vector<MetricScore> scores;
  std::vector<std::pair<std::string, std::string>> failures;

  std::optional<std::vector<deepsim::FeatureMap>> feats_a, feats_b;
  auto deep_features = [&]() {
    if (!feats_a) {
      feats_a = deepsim::extract(fx, imgio::gray_to_rgb(a));
      feats_b = deepsim::extract(fx, imgio::gray_to_rgb(b));
    }
  };

  for (const auto& name : names) {
    try {
      double value;
      if (name == "dists") {
        deep_features();
        value = deepsim::dists_from_features(*feats_a, *feats_b, fx);
      } else if (name == "lpips") {
        deep_features();
        value = deepsim::lpips_from_features(*feats_a, *feats_b);
      } else {
        value = classical(name, a, b);
      }
      if (!std::isfinite(value)) throw Error("non-finite score");
      scores.push_back({name, value, pair_id});
    } catch (const std::exception& e) {
      failures.emplace_back(name, e.what());
    }
  }
  if (!failures.empty()) throw BatteryError(pair_id, std::move(failures));
  return scores;
}

}  // namespace mmf::metrics
