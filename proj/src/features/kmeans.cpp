#include <algorithm>
#include <cmath>
#include <limits>

#include "mmf/common/error.hpp"
#include "mmf/common/random.hpp"
#include "mmf/features/features.hpp"

namespace mmf::features {

namespace {

constexpr int kMaxIterations = 100;
constexpr double kTolerance = 1e-6;

double sq_dist(const double* a, const std::vector<double>& c) {
  double s = 0.0;
  for (std::size_t j = 0; j < c.size(); ++j) {
    const double d = a[j] - c[j];
    s += d * d;
  }
  return s;
}

std::size_t nearest(const std::vector<std::vector<double>>& dist, std::size_t row) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < dist.size(); ++c)
    if (dist[c][row] < dist[best][row]) best = c;
  return best;
}

}  // namespace

std::vector<std::vector<double>> KMeansAugmentation::distances(const FeatureTable& table) const {
  const std::size_t n = table.rows(), d = columns.size();
  std::vector<std::vector<double>> z(n, std::vector<double>(d));
  for (std::size_t j = 0; j < d; ++j) {
    const auto col = table.column(columns[j]);
    for (std::size_t r = 0; r < n; ++r) z[r][j] = (col[r] - mean[j]) / stddev[j];
  }
  std::vector<std::vector<double>> out(k(), std::vector<double>(n));
  const auto nn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < nn; ++r)
    for (std::size_t c = 0; c < k(); ++c) out[c][r] = std::sqrt(sq_dist(z[r].data(), centers[c]));
  return out;
}

FeatureTable KMeansAugmentation::apply(const FeatureTable& table) const {
  auto dist = distances(table);
  FeatureTable out = table;
  std::vector<double> cluster(table.rows());
  for (std::size_t r = 0; r < table.rows(); ++r) cluster[r] = static_cast<double>(nearest(dist, r));
  for (std::size_t c = 0; c < k(); ++c) out.add_column("kmeans_dist_" + std::to_string(c), std::move(dist[c]));
  out.add_column("kmeans_cluster", std::move(cluster));
  return out;
}

std::size_t default_kmeans_k(std::size_t rows) {
  const auto k = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(rows) / 2.0)));
  return std::clamp<std::size_t>(k, 2, 16);
}

std::pair<FeatureTable, KMeansAugmentation> kmeans_augment(const FeatureTable& table, std::size_t k,
                                                            std::uint64_t seed) {
  if (k < 2) throw InvalidArgument("kmeans: k must be >= 2");
  const std::size_t n = table.rows();
  if (k > n) throw InvalidArgument("kmeans: k exceeds row count");

  KMeansAugmentation aug;
  for (std::size_t c = 0; c < table.cols(); ++c) {
    const auto col = table.column(c);
    double m = 0.0;
    for (double v : col) m += v;
    m /= static_cast<double>(n);
    double var = 0.0;
    for (double v : col) var += (v - m) * (v - m);
    const double sd = std::sqrt(var / static_cast<double>(n));
    if (!(sd > 0.0)) continue;
    aug.columns.push_back(table.columns()[c]);
    aug.mean.push_back(m);
    aug.stddev.push_back(sd);
  }
  if (aug.columns.empty()) throw InvalidArgument("kmeans: every feature column is constant");
  const std::size_t d = aug.columns.size();

  std::vector<std::vector<double>> z(n, std::vector<double>(d));
  for (std::size_t j = 0; j < d; ++j) {
    const auto col = table.column(aug.columns[j]);
    for (std::size_t r = 0; r < n; ++r) z[r][j] = (col[r] - aug.mean[j]) / aug.stddev[j];
  }

  // k-means++ seeding
  Rng rng(seed);
  auto& centers = aug.centers;
  centers.push_back(z[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(n) - 1))]);
  std::vector<double> best_d(n, std::numeric_limits<double>::infinity());
  while (centers.size() < k) {
    double total = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      best_d[r] = std::min(best_d[r], sq_dist(z[r].data(), centers.back()));
      total += best_d[r];
    }
    std::size_t pick = n - 1;
    if (total > 0.0) {
      const double u = uniform01(rng) * total;
      double acc = 0.0;
      for (std::size_t r = 0; r < n; ++r) {
        acc += best_d[r];
        if (u < acc) {
          pick = r;
          break;
        }
      }
    } else {
      pick = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(n) - 1));
    }
    centers.push_back(z[pick]);
  }

  // Lloyd iterations
  std::vector<std::size_t> assign(n);
  const auto nn = static_cast<std::ptrdiff_t>(n);
  for (int it = 0; it < kMaxIterations; ++it) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t r = 0; r < nn; ++r) {
      std::size_t best = 0;
      double bd = sq_dist(z[r].data(), centers[0]);
      for (std::size_t c = 1; c < k; ++c) {
        const double dd = sq_dist(z[r].data(), centers[c]);
        if (dd < bd) {
          bd = dd;
          best = c;
        }
      }
      assign[r] = best;
    }
    std::vector<std::vector<double>> sums(k, std::vector<double>(d, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t r = 0; r < n; ++r) {
      ++counts[assign[r]];
      for (std::size_t j = 0; j < d; ++j) sums[assign[r]][j] += z[r][j];
    }
    double shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      for (std::size_t j = 0; j < d; ++j) sums[c][j] /= static_cast<double>(counts[c]);
      shift = std::max(shift, std::sqrt(sq_dist(sums[c].data(), centers[c])));
      centers[c] = std::move(sums[c]);
    }
    if (shift < kTolerance) break;
  }
  return {aug.apply(table), aug};
}

}  // namespace mmf::features
