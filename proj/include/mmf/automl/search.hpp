#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "mmf/common/random.hpp"
#include "mmf/gbdt/gbdt.hpp"

namespace mmf::automl {

struct SearchSpace {
  double learning_rate_min = 0.01, learning_rate_max = 0.3;  // log-uniform
  int max_leaves_min = 15, max_leaves_max = 63;
  int max_depth_min = 3, max_depth_max = 8;
  int min_samples_leaf_min = 1, min_samples_leaf_max = 30;
  double l2_reg_min = 1e-3, l2_reg_max = 10.0;  // log-uniform
  double subsample_rows_min = 0.7, subsample_rows_max = 1.0;
  double subsample_cols_min = 0.6, subsample_cols_max = 1.0;
  int max_trees = 1000;
  int early_stopping_rounds = 50;

  gbdt::GbdtConfig sample(gbdt::GrowthStrategy strategy, Rng& rng) const;
  nlohmann::json to_json() const;
};

inline constexpr double kHillClimbFactor = 1.5;
inline constexpr int kHillClimbRounds = 2;

// Untuned starting point for each strategy.
gbdt::GbdtConfig default_config(gbdt::GrowthStrategy strategy);

// One-parameter moves: +-1 on integer parameters, x/÷1.5 on real ones,
// clamped to valid values; moves that leave the config unchanged are dropped.
std::vector<gbdt::GbdtConfig> hill_climb_neighbors(const gbdt::GbdtConfig& cfg);

// Caruana selection with replacement over bagged candidate subsets. Returns a
// repetition count per model; models never chosen get 0.
std::vector<std::size_t> greedy_ensemble(const std::vector<std::vector<double>>& valid_predictions,
                                         const std::vector<double>& valid_targets, std::uint64_t seed);

// Repetition-weighted mean of member predictions.
std::vector<double> weighted_mean(const std::vector<std::vector<double>>& predictions,
                                  const std::vector<std::size_t>& counts);

inline constexpr int kGreedyMaxSteps = 50;
inline constexpr int kGreedyPatience = 5;

}  // namespace mmf::automl
