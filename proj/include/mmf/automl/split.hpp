#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mmf/features/table.hpp"

namespace mmf::automl {

struct ValidationPlan {
  enum class Mode { kfold, holdout };
  Mode mode = Mode::kfold;
  int k = 5;                    // kfold, 2..10
  double train_fraction = 0.8;  // holdout
  std::uint64_t seed = 42;
};

// Row indices into the table that was split.
struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> valid;
};

// Sorted distinct group ids.
std::vector<std::string> distinct_groups(const features::FeatureTable& table);

// Groups are shuffled with the seed and dealt round-robin (kfold) or cut at
// round(train_fraction * groups) (holdout). Rows keep table order.
std::vector<Fold> split_groups(const features::FeatureTable& table, const ValidationPlan& plan);

// Outer test split: round(test_fraction * groups) groups go to `valid`.
Fold split_test(const features::FeatureTable& table, double test_fraction, std::uint64_t seed);

// Throws std::logic_error when a group id appears on both sides.
void assert_disjoint_groups(const features::FeatureTable& table, const Fold& fold);

}  // namespace mmf::automl
