#include "mmf/metrics/registry.hpp"

#include <algorithm>
#include <limits>

#include "mmf/common/error.hpp"

namespace mmf::metrics {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
using enum Polarity;
using enum Tier;

// Order mirrors the benchmark table. Nominal costs are single-thread
// wall-clock ratios measured at 256x256 with tiny-v1 (psnr = 1); the
// unimplemented rows use the ratio of the reference timings.
const std::vector<MetricDescriptor> kRegistry = {
    {"psnr", higher_is_better, core, 1.0, true, false, 0.0, 100.0, "peak signal-to-noise ratio (dB)"},
    {"tv_ratio", higher_is_better, core, 3.5, true, false, 0.0, kInf, "source TV / output TV"},
    {"mae", lower_is_better, core, 0.8, true, false, 0.0, 255.0, "mean absolute error (byte scale)"},
    {"ssim", higher_is_better, core, 19.0, true, false, -1.0, 1.0, "structural similarity"},
    {"ms_ssim", higher_is_better, core, 26.0, true, false, 0.0, 1.0, "multi-scale SSIM"},
    {"fsim", higher_is_better, extended, 360.0, true, false, 0.0, 1.0, "feature similarity"},
    {"vsi", higher_is_better, extended, 170.0, true, false, 0.0, 1.0, "visual saliency induced index"},
    {"gmsd", lower_is_better, core, 3.7, true, false, 0.0, 1.0, "gradient magnitude similarity deviation"},
    {"nlpd", lower_is_better, core, 17.0, true, false, 0.0, kInf, "normalized Laplacian pyramid distance"},
    {"mad", lower_is_better, extended, 570.0, false, false, 0.0, kInf, "most apparent distortion (not implemented)"},
    {"vif", higher_is_better, extended, 235.0, false, false, 0.0, kInf, "wavelet-domain VIF (reserved)"},
    {"vif_s", higher_is_better, core, 22.0, true, false, 0.0, kInf, "spatial-domain VIF"},
    {"lpips", lower_is_better, core, 87.0, true, true, 0.0, kInf, "LPIPS-style deep feature distance"},
    {"dists", lower_is_better, core, 91.0, true, true, 0.0, 1.0, "deep structure and texture distance"},
};

}  // namespace

std::span<const MetricDescriptor> registry() { return kRegistry; }

const MetricDescriptor& descriptor(std::string_view name) {
  auto it = std::find_if(kRegistry.begin(), kRegistry.end(),
                         [&](const MetricDescriptor& d) { return d.name == name; });
  if (it == kRegistry.end()) throw InvalidArgument("unknown metric: " + std::string(name));
  return *it;
}

bool is_registered(std::string_view name) {
  return std::any_of(kRegistry.begin(), kRegistry.end(),
                     [&](const MetricDescriptor& d) { return d.name == name; });
}

std::vector<std::string> battery_metrics(BatteryTier tier) {
  std::vector<std::string> names;
  for (const auto& d : kRegistry) {
    if (!d.implemented) continue;
    if (tier == BatteryTier::core && d.tier != Tier::core) continue;
    names.push_back(d.name);
  }
  return names;
}

std::string_view to_string(Polarity p) {
  return p == Polarity::higher_is_better ? "higher-is-better" : "lower-is-better";
}

std::string_view to_string(Tier t) { return t == Tier::core ? "core" : "extended"; }

std::string_view to_string(BatteryTier t) { return t == BatteryTier::core ? "core" : "full"; }

BatteryTier parse_battery_tier(std::string_view s) {
  if (s == "core") return BatteryTier::core;
  if (s == "full") return BatteryTier::full;
  throw InvalidArgument("unknown tier '" + std::string(s) + "' (expected core or full)");
}

std::string_view arrow(Polarity p) { return p == Polarity::higher_is_better ? "↑" : "↓"; }

}  // namespace mmf::metrics
