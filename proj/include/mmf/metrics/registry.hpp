#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mmf::metrics {

enum class Polarity { higher_is_better, lower_is_better };
enum class Tier { core, extended };
// Battery selection: core = core-tier metrics; full = every implemented metric.
enum class BatteryTier { core, full };

struct MetricDescriptor {
  std::string name;
  Polarity polarity;
  Tier tier;
  double nominal_cost;  // relative to psnr = 1, measured at 256x256
  bool implemented;
  bool needs_extractor;
  double range_min;  // documented score range, inclusive
  double range_max;
  std::string description;
};

struct MetricScore {
  std::string name;
  double value;
  std::string pair_id;
};

// Fixed registry order; feature-table columns and battery output follow it.
std::span<const MetricDescriptor> registry();

const MetricDescriptor& descriptor(std::string_view name);
bool is_registered(std::string_view name);

// Implemented metrics in the tier, registry order.
std::vector<std::string> battery_metrics(BatteryTier tier);

std::string_view to_string(Polarity p);
std::string_view to_string(Tier t);
std::string_view to_string(BatteryTier t);
BatteryTier parse_battery_tier(std::string_view s);

// Table arrow for the polarity.
std::string_view arrow(Polarity p);

}  // namespace mmf::metrics
