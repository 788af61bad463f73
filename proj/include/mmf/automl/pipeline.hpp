#pragma once

#include <cstdint>
#include <string>

#include "mmf/automl/bundle.hpp"
#include "mmf/automl/search.hpp"
#include "mmf/automl/split.hpp"

namespace mmf::automl {

enum class TrainMode { compete, fast };

std::string_view to_string(TrainMode m);
TrainMode parse_train_mode(std::string_view s);

struct PipelineOptions {
  double budget_seconds = 600.0;
  std::uint64_t seed = 42;
  TrainMode mode = TrainMode::compete;
  double test_fraction = 0.1;
  std::size_t kfold_min_groups = 50;
  int kfold_k = 5;
  double holdout_train_fraction = 0.8;
  int random_models_per_strategy = 4;
  std::size_t golden_top_n = features::kGoldenDefaultTopN;
  std::size_t top_models_to_improve = 3;
  std::size_t stacking_inputs = 5;
  SearchSpace space;
  bool verbose = false;  // progress lines on stderr
};

inline constexpr std::size_t kMinTrainingGroups = 20;

// Runs the full training regimen. `metrics_tier` and `provenance` are stored
// in the bundle verbatim.
EnsembleBundle train_pipeline(const features::FeatureTable& table, const PipelineOptions& opts,
                              const std::string& metrics_tier = "core", const std::string& provenance = "");

}  // namespace mmf::automl
