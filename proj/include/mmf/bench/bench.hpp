#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mmf/automl/bundle.hpp"
#include "mmf/deepsim/extractor.hpp"
#include "mmf/features/manifest.hpp"
#include "mmf/metrics/registry.hpp"

namespace mmf::bench {

enum class Pairing { source_vs_gt, source_vs_translated, translated_vs_gt };
inline constexpr std::array<Pairing, 3> kPairings = {Pairing::source_vs_gt, Pairing::source_vs_translated,
                                                     Pairing::translated_vs_gt};
std::string_view to_string(Pairing p);

struct Stat {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for a single value
};

Stat summarize(const std::vector<double>& values);

struct MetricRow {
  std::string name;
  metrics::Polarity polarity;
  Stat time_ms;  // empty when timing was not requested
  std::array<Stat, 3> scores;  // kPairings order
  std::optional<double> reference_ms;  // published per-metric time, for orientation only
};

struct BenchReport {
  std::vector<MetricRow> rows;  // registry order
  std::size_t repetitions = 0;
  std::size_t triplets = 0;
  std::string tier;
  std::string environment;
  double core_combined_ms = 0.0;  // sum of core-tier mean times
  bool timed = true;
};

// Published per-metric wall-clock (ms) for the base-colour task, if listed.
std::optional<double> reference_time_ms(std::string_view metric);

// Scores every metric of the tier on all three pairings of every triplet.
// With reps > 0, also times each metric single-threaded: one untimed warm-up,
// then `reps` timed calls cycling over the source/translated pairs (images
// preloaded, decode excluded).
BenchReport run_bench(const features::TripletManifest& manifest, std::size_t reps, metrics::BatteryTier tier,
                      const deepsim::FeatureExtractor& fx);

// Scores only (the `stats` command).
BenchReport run_stats(const features::TripletManifest& manifest, metrics::BatteryTier tier,
                      const deepsim::FeatureExtractor& fx);

void write_csv(const BenchReport& report, std::ostream& out);
void write_table(const BenchReport& report, std::ostream& out);

std::string machine_descriptor();

// ---- full vs reduced feature set ----

struct TradeoffSide {
  std::string tier;
  std::vector<std::string> metrics;
  double test_mae = 0.0;
  double test_r2 = 0.0;
  double metric_ms = 0.0;  // summed per-image metric wall clock
};

struct TradeoffReport {
  TradeoffSide full;
  TradeoffSide reduced;
  double delta_mae = 0.0;  // reduced - full
  double delta_r2 = 0.0;
  double delta_ms = 0.0;
};

// `test` rows are the shared held-out groups and must carry every raw
// feature of both bundles. `per_metric_ms` gives the per-image cost of each
// metric (e.g. from run_bench).
TradeoffReport tradeoff_report(const automl::EnsembleBundle& full, const automl::EnsembleBundle& reduced,
                               const features::FeatureTable& test,
                               const std::vector<std::pair<std::string, double>>& per_metric_ms);

void write_tradeoff(const TradeoffReport& report, std::ostream& out);

}  // namespace mmf::bench
