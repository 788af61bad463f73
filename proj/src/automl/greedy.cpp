#include <algorithm>
#include <cmath>
#include <numeric>

#include "mmf/automl/search.hpp"
#include "mmf/common/error.hpp"
#include "mmf/gbdt/gbdt.hpp"

namespace mmf::automl {

std::vector<double> weighted_mean(const std::vector<std::vector<double>>& predictions,
                                  const std::vector<std::size_t>& counts) {
  if (predictions.size() != counts.size()) throw InvalidArgument("weighted_mean: length mismatch");
  const std::size_t total = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
  if (total == 0) throw InvalidArgument("weighted_mean: empty ensemble");
  std::vector<double> out;
  for (std::size_t m = 0; m < predictions.size(); ++m) {
    if (counts[m] == 0) continue;
    if (out.empty()) out.assign(predictions[m].size(), 0.0);
    for (std::size_t r = 0; r < out.size(); ++r) out[r] += static_cast<double>(counts[m]) * predictions[m][r];
  }
  for (double& v : out) v /= static_cast<double>(total);
  return out;
}

std::vector<std::size_t> greedy_ensemble(const std::vector<std::vector<double>>& preds,
                                         const std::vector<double>& y, std::uint64_t seed) {
  const std::size_t m = preds.size();
  if (m == 0) throw InvalidArgument("greedy ensemble: no models");
  for (const auto& p : preds)
    if (p.size() != y.size()) throw InvalidArgument("greedy ensemble: predictions not aligned with targets");

  std::size_t first = 0;
  double first_rmse = gbdt::rmse(preds[0], y);
  for (std::size_t i = 1; i < m; ++i) {
    const double r = gbdt::rmse(preds[i], y);
    if (r < first_rmse) {
      first_rmse = r;
      first = i;
    }
  }
  std::vector<std::size_t> counts(m, 0), best_counts;
  counts[first] = 1;
  best_counts = counts;
  double best = first_rmse;
  std::vector<double> sum = preds[first];
  std::size_t total = 1;

  Rng rng(seed);
  const std::size_t bag = std::max<std::size_t>(1, (m + 1) / 2);
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> trial(y.size());
  int stale = 0;
  for (int step = 0; step < kGreedyMaxSteps && stale < kGreedyPatience; ++step) {
    shuffle(order, rng);
    std::vector<std::size_t> subset(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(bag));
    std::sort(subset.begin(), subset.end());
    std::size_t pick = subset[0];
    double pick_rmse = HUGE_VAL;
    for (auto i : subset) {
      for (std::size_t r = 0; r < y.size(); ++r) trial[r] = (sum[r] + preds[i][r]) / static_cast<double>(total + 1);
      const double e = gbdt::rmse(trial, y);
      if (e < pick_rmse) {
        pick_rmse = e;
        pick = i;
      }
    }
    ++counts[pick];
    ++total;
    for (std::size_t r = 0; r < y.size(); ++r) sum[r] += preds[pick][r];
    const double exact = gbdt::rmse(weighted_mean(preds, counts), y);
    if (exact < best) {
      best = exact;
      best_counts = counts;
      stale = 0;
    } else {
      ++stale;
    }
  }
  return best_counts;
}

}  // namespace mmf::automl
