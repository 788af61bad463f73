#include "mmf/automl/split.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include "mmf/common/error.hpp"
#include "mmf/common/random.hpp"

namespace mmf::automl {

std::vector<std::string> distinct_groups(const features::FeatureTable& table) {
  std::set<std::string> s(table.group_ids().begin(), table.group_ids().end());
  return {s.begin(), s.end()};
}

namespace {

std::vector<std::string> shuffled_groups(const features::FeatureTable& table, std::uint64_t seed) {
  auto groups = distinct_groups(table);
  Rng rng(seed);
  shuffle(groups, rng);
  return groups;
}

Fold assign(const features::FeatureTable& table, const std::set<std::string>& valid_groups) {
  Fold f;
  for (std::size_t r = 0; r < table.rows(); ++r)
    (valid_groups.count(table.group_id(r)) ? f.valid : f.train).push_back(r);
  return f;
}

}  // namespace

std::vector<Fold> split_groups(const features::FeatureTable& table, const ValidationPlan& plan) {
  auto groups = shuffled_groups(table, plan.seed);
  std::vector<Fold> folds;
  if (plan.mode == ValidationPlan::Mode::kfold) {
    if (plan.k < 2 || plan.k > 10) throw InvalidArgument("k-fold requires 2 <= k <= 10");
    if (groups.size() < static_cast<std::size_t>(plan.k))
      throw InvalidArgument("fewer groups (" + std::to_string(groups.size()) + ") than folds (" +
                            std::to_string(plan.k) + ")");
    for (int f = 0; f < plan.k; ++f) {
      std::set<std::string> valid;
      for (std::size_t i = static_cast<std::size_t>(f); i < groups.size(); i += static_cast<std::size_t>(plan.k))
        valid.insert(groups[i]);
      folds.push_back(assign(table, valid));
    }
  } else {
    if (!(plan.train_fraction > 0.0 && plan.train_fraction < 1.0))
      throw InvalidArgument("holdout train_fraction must be in (0,1)");
    if (groups.size() < 2) throw InvalidArgument("holdout requires at least 2 groups");
    auto n_train = static_cast<std::size_t>(std::lround(plan.train_fraction * static_cast<double>(groups.size())));
    n_train = std::clamp<std::size_t>(n_train, 1, groups.size() - 1);
    folds.push_back(assign(table, std::set<std::string>(groups.begin() + static_cast<std::ptrdiff_t>(n_train), groups.end())));
  }
  for (const auto& f : folds) assert_disjoint_groups(table, f);
  return folds;
}

Fold split_test(const features::FeatureTable& table, double test_fraction, std::uint64_t seed) {
  auto groups = shuffled_groups(table, seed);
  if (groups.size() < 2) throw InvalidArgument("test split requires at least 2 groups");
  auto n_test = static_cast<std::size_t>(std::lround(test_fraction * static_cast<double>(groups.size())));
  n_test = std::clamp<std::size_t>(n_test, 1, groups.size() - 1);
  Fold f = assign(table, std::set<std::string>(groups.begin(), groups.begin() + static_cast<std::ptrdiff_t>(n_test)));
  assert_disjoint_groups(table, f);
  return f;
}

void assert_disjoint_groups(const features::FeatureTable& table, const Fold& fold) {
  std::set<std::string> train;
  for (auto r : fold.train) train.insert(table.group_id(r));
  for (auto r : fold.valid)
    if (train.count(table.group_id(r))) throw std::logic_error("group leakage: " + table.group_id(r));
}

}  // namespace mmf::automl
