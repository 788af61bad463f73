#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mmf/features/table.hpp"
#include "mmf/gbdt/tree.hpp"

namespace mmf::gbdt {

enum class GrowthStrategy { leaf_wise, level_wise, oblivious };

std::string_view to_string(GrowthStrategy s);
GrowthStrategy parse_strategy(std::string_view s);

struct GbdtConfig {
  GrowthStrategy strategy = GrowthStrategy::level_wise;
  double learning_rate = 0.1;
  int max_trees = 1000;
  int max_leaves = 31;  // leaf_wise
  int max_depth = 6;    // level_wise, oblivious
  int min_samples_leaf = 20;
  double l2_reg = 0.0;
  double subsample_rows = 1.0;
  double subsample_cols = 1.0;
  int early_stopping_rounds = 50;
  std::uint64_t seed = 42;

  void validate() const;
  bool operator==(const GbdtConfig&) const = default;
};

struct IterationRecord {
  double train_rmse = 0.0;
  std::optional<double> valid_rmse;
  bool operator==(const IterationRecord&) const = default;
};

struct GbdtModel {
  double base_prediction = 0.0;
  std::vector<Tree> trees;
  GbdtConfig config;
  std::vector<std::string> feature_names;
  // Entry i describes the ensemble after i + 1 trees were attempted.
  std::vector<IterationRecord> train_history;

  std::vector<double> predict(const features::FeatureTable& rows) const;
  double max_abs_leaf() const;
  bool operator==(const GbdtModel&) const = default;
};

// Squared-error gradient boosting with histogram split search. `valid` may
// have zero rows, which disables early stopping.
GbdtModel fit(const features::FeatureTable& train, const features::FeatureTable& valid, const GbdtConfig& cfg,
              std::optional<std::span<const double>> weights = std::nullopt);

inline std::vector<double> predict(const GbdtModel& model, const features::FeatureTable& rows) {
  return model.predict(rows);
}

// Level-wise regression tree with exact (sorted-value) splits fitted directly
// on the target. Feature indices refer to train's columns.
Tree single_tree_fit(const features::FeatureTable& train, int depth, int min_leaf);

// Evaluates a tree on every row; feature indices refer to table columns.
std::vector<double> predict_tree(const Tree& tree, const features::FeatureTable& table);

double rmse(std::span<const double> pred, std::span<const double> target);

}  // namespace mmf::gbdt
