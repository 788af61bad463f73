#include <algorithm>
#include <cmath>

#include "mmf/automl/search.hpp"

namespace mmf::automl {

using gbdt::GbdtConfig;
using gbdt::GrowthStrategy;

namespace {

double log_uniform(Rng& rng, double lo, double hi) { return std::exp(uniform(rng, std::log(lo), std::log(hi))); }

}  // namespace

GbdtConfig SearchSpace::sample(GrowthStrategy strategy, Rng& rng) const {
  GbdtConfig c = default_config(strategy);
  c.learning_rate = log_uniform(rng, learning_rate_min, learning_rate_max);
  c.max_leaves = static_cast<int>(uniform_int(rng, max_leaves_min, max_leaves_max));
  c.max_depth = static_cast<int>(uniform_int(rng, max_depth_min, max_depth_max));
  c.min_samples_leaf = static_cast<int>(uniform_int(rng, min_samples_leaf_min, min_samples_leaf_max));
  c.l2_reg = log_uniform(rng, l2_reg_min, l2_reg_max);
  c.subsample_rows = uniform(rng, subsample_rows_min, subsample_rows_max);
  c.subsample_cols = uniform(rng, subsample_cols_min, subsample_cols_max);
  c.max_trees = max_trees;
  c.early_stopping_rounds = early_stopping_rounds;
  c.seed = rng();
  return c;
}

nlohmann::json SearchSpace::to_json() const {
  return {{"learning_rate", {{"dist", "log_uniform"}, {"min", learning_rate_min}, {"max", learning_rate_max}}},
          {"max_leaves", {{"dist", "uniform_int"}, {"min", max_leaves_min}, {"max", max_leaves_max}}},
          {"max_depth", {{"dist", "uniform_int"}, {"min", max_depth_min}, {"max", max_depth_max}}},
          {"min_samples_leaf", {{"dist", "uniform_int"}, {"min", min_samples_leaf_min}, {"max", min_samples_leaf_max}}},
          {"l2_reg", {{"dist", "log_uniform"}, {"min", l2_reg_min}, {"max", l2_reg_max}}},
          {"subsample_rows", {{"dist", "uniform"}, {"min", subsample_rows_min}, {"max", subsample_rows_max}}},
          {"subsample_cols", {{"dist", "uniform"}, {"min", subsample_cols_min}, {"max", subsample_cols_max}}},
          {"max_trees", max_trees},
          {"early_stopping_rounds", early_stopping_rounds}};
}

GbdtConfig default_config(GrowthStrategy strategy) {
  GbdtConfig c;
  c.strategy = strategy;
  c.learning_rate = 0.1;
  c.max_trees = 1000;
  c.early_stopping_rounds = 50;
  c.seed = 42;
  switch (strategy) {
    case GrowthStrategy::leaf_wise:
      c.max_leaves = 31;
      c.min_samples_leaf = 20;
      c.l2_reg = 0.0;
      break;
    case GrowthStrategy::level_wise:
      c.max_depth = 6;
      c.min_samples_leaf = 1;
      c.l2_reg = 1.0;
      break;
    case GrowthStrategy::oblivious:
      c.max_depth = 6;
      c.min_samples_leaf = 1;
      c.l2_reg = 3.0;
      break;
  }
  return c;
}

std::vector<GbdtConfig> hill_climb_neighbors(const GbdtConfig& cfg) {
  std::vector<GbdtConfig> out;
  auto push = [&](GbdtConfig c) {
    if (c == cfg) return;
    if (std::find(out.begin(), out.end(), c) != out.end()) return;
    out.push_back(c);
  };
  for (int d : {-1, 1}) {
    GbdtConfig c = cfg;
    if (cfg.strategy == GrowthStrategy::leaf_wise)
      c.max_leaves = std::max(2, cfg.max_leaves + d);
    else
      c.max_depth = std::max(1, cfg.max_depth + d);
    push(c);
  }
  for (int d : {-1, 1}) {
    GbdtConfig c = cfg;
    c.min_samples_leaf = std::max(1, cfg.min_samples_leaf + d);
    push(c);
  }
  for (double f : {1.0 / kHillClimbFactor, kHillClimbFactor}) {
    GbdtConfig c = cfg;
    c.learning_rate = std::min(1.0, cfg.learning_rate * f);
    push(c);
    c = cfg;
    c.l2_reg = cfg.l2_reg * f;
    push(c);
    c = cfg;
    c.subsample_rows = std::min(1.0, cfg.subsample_rows * f);
    push(c);
    c = cfg;
    c.subsample_cols = std::min(1.0, cfg.subsample_cols * f);
    push(c);
  }
  return out;
}

}  // namespace mmf::automl
