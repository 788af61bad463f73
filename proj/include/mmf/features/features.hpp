#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mmf/deepsim/extractor.hpp"
#include "mmf/features/manifest.hpp"
#include "mmf/features/table.hpp"
#include "mmf/gbdt/gbdt.hpp"
#include "mmf/metrics/registry.hpp"

namespace mmf::features {

// One row per record: battery(source, translated) in registry order, plus
// target_dists = dists(translated, ground_truth) when ground truth exists.
// Records whose translated path is the ground-truth path get target 0.
FeatureTable build_feature_table(const TripletManifest& manifest, metrics::BatteryTier tier,
                                 const deepsim::FeatureExtractor& fx);

// ---- K-Means centres ----

struct KMeansAugmentation {
  std::vector<std::string> columns;  // clustered (non-constant) input columns
  std::vector<double> mean;
  std::vector<double> stddev;
  std::vector<std::vector<double>> centers;  // k x columns.size(), standardized
  std::size_t k() const { return centers.size(); }

  // Standardized Euclidean distance of every row to every centre.
  std::vector<std::vector<double>> distances(const FeatureTable& table) const;
  // Appends kmeans_dist_<i> columns and the kmeans_cluster column.
  FeatureTable apply(const FeatureTable& table) const;
};

std::size_t default_kmeans_k(std::size_t rows);

std::pair<FeatureTable, KMeansAugmentation> kmeans_augment(const FeatureTable& table, std::size_t k,
                                                            std::uint64_t seed);

// ---- Golden Features ----

enum class GoldenOp { subtract, add, multiply, ratio };

std::string_view to_string(GoldenOp op);
GoldenOp parse_golden_op(std::string_view s);

inline constexpr double kGoldenRatioEps = 1e-10;
inline constexpr double kGoldenClamp = 1e15;
inline constexpr std::size_t kGoldenSubsample = 5000;
inline constexpr int kGoldenDepth = 3;
inline constexpr int kGoldenMinLeaf = 5;
inline constexpr std::size_t kGoldenDefaultTopN = 10;

struct GoldenFeatureDef {
  std::string left;
  std::string right;
  GoldenOp op = GoldenOp::subtract;
  double score = 0.0;  // probe-tree test MSE
  // Winsorization bounds from the training column (0.1 / 99.9 percentiles).
  double lower = -kGoldenClamp;
  double upper = kGoldenClamp;

  std::string name() const;
  // Combined values clamped to +-1e15, before winsorization.
  std::vector<double> raw(const FeatureTable& table) const;
  std::vector<double> apply(const FeatureTable& table) const;
};

double golden_combine(GoldenOp op, double a, double b);

// Every candidate over all unordered column pairs, in enumeration order, with
// its probe score; bounds unset.
std::vector<GoldenFeatureDef> golden_candidates(const FeatureTable& table, std::uint64_t seed);

// Top `top_n` candidates by ascending test MSE (ties by name), with
// winsorization bounds fitted on `table`.
std::vector<GoldenFeatureDef> golden_features(const FeatureTable& table, std::size_t top_n, std::uint64_t seed);

FeatureTable append_golden(const FeatureTable& table, const std::vector<GoldenFeatureDef>& defs);

// Linear-interpolation percentile, p in [0, 100].
double percentile(std::vector<double> values, double p);

// ---- permutation feature selection ----

inline constexpr int kNoiseColumns = 3;
inline constexpr int kPermutationRepeats = 3;
inline constexpr std::size_t kMinRetained = 3;

std::string noise_column_name(int i);
bool is_noise_column(std::string_view name);

// Appends noise_0..noise_2 with seeded uniform [0,1] values.
FeatureTable add_noise_columns(const FeatureTable& table, std::uint64_t seed);

struct SelectionResult {
  std::vector<std::string> retained;  // input column order
  std::vector<std::pair<std::string, double>> importance;  // every model column
  double noise_threshold = 0.0;
};

// `table` holds validation rows with exactly the model's columns (noise
// included). Importance = mean RMSE increase over repeated shuffles.
SelectionResult permutation_selection(const FeatureTable& table, const gbdt::GbdtModel& model, std::uint64_t seed);

inline std::vector<std::string> select_features(const FeatureTable& table, const gbdt::GbdtModel& model,
                                                std::uint64_t seed) {
  return permutation_selection(table, model, seed).retained;
}

}  // namespace mmf::features
