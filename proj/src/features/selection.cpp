#include <algorithm>
#include <numeric>

#include "mmf/common/error.hpp"
#include "mmf/common/random.hpp"
#include "mmf/features/features.hpp"

namespace mmf::features {

std::string noise_column_name(int i) { return "noise_" + std::to_string(i); }

bool is_noise_column(std::string_view name) {
  for (int i = 0; i < kNoiseColumns; ++i)
    if (name == noise_column_name(i)) return true;
  return false;
}

FeatureTable add_noise_columns(const FeatureTable& table, std::uint64_t seed) {
  FeatureTable out = table;
  for (int i = 0; i < kNoiseColumns; ++i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    std::vector<double> v(table.rows());
    for (double& x : v) x = uniform01(rng);
    out.add_column(noise_column_name(i), std::move(v));
  }
  return out;
}

SelectionResult permutation_selection(const FeatureTable& table, const gbdt::GbdtModel& model, std::uint64_t seed) {
  if (table.columns() != model.feature_names)
    throw InvalidArgument("feature selection: model columns differ from table columns");
  if (table.rows() == 0) throw InvalidArgument("feature selection: no validation rows");
  const auto y = table.target();
  const double baseline = gbdt::rmse(model.predict(table), y);

  const auto nc = static_cast<std::ptrdiff_t>(table.cols());
  std::vector<double> importance(table.cols(), 0.0);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t c = 0; c < nc; ++c) {
    FeatureTable shuffled = table;
    const auto original = table.column(static_cast<std::size_t>(c));
    double sum = 0.0;
    for (int rep = 0; rep < kPermutationRepeats; ++rep) {
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(c) * kPermutationRepeats + rep));
      std::vector<double> v(original.begin(), original.end());
      shuffle(v, rng);
      shuffled.set_column(static_cast<std::size_t>(c), std::move(v));
      sum += gbdt::rmse(model.predict(shuffled), y) - baseline;
    }
    importance[c] = sum / kPermutationRepeats;
  }

  SelectionResult res;
  bool any_noise = false;
  res.noise_threshold = 0.0;
  for (std::size_t c = 0; c < table.cols(); ++c) {
    res.importance.emplace_back(table.columns()[c], importance[c]);
    if (is_noise_column(table.columns()[c])) {
      res.noise_threshold = any_noise ? std::max(res.noise_threshold, importance[c]) : importance[c];
      any_noise = true;
    }
  }
  std::vector<std::size_t> real;
  for (std::size_t c = 0; c < table.cols(); ++c)
    if (!is_noise_column(table.columns()[c])) real.push_back(c);

  std::vector<bool> keep(table.cols(), false);
  std::size_t kept = 0;
  for (auto c : real)
    if (importance[c] > res.noise_threshold) {
      keep[c] = true;
      ++kept;
    }
  if (kept < kMinRetained) {
    std::vector<std::size_t> order = real;
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return importance[a] > importance[b]; });
    for (std::size_t i = 0; i < order.size() && i < kMinRetained; ++i) keep[order[i]] = true;
  }
  for (auto c : real)
    if (keep[c]) res.retained.push_back(table.columns()[c]);
  return res;
}

}  // namespace mmf::features
