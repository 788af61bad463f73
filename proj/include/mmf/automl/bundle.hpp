#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mmf/features/features.hpp"
#include "mmf/gbdt/gbdt.hpp"

namespace mmf::automl {

// A configuration trained on every validation fold; predicts the mean of the
// fold models.
struct TrainedModel {
  std::string id;
  std::string stage;
  gbdt::GbdtConfig config;
  std::vector<std::string> columns;
  bool weighted = false;
  std::vector<gbdt::GbdtModel> folds;
  double valid_rmse = 0.0;

  std::vector<double> predict(const features::FeatureTable& augmented) const;
};

struct EnsembleMember {
  std::string model_id;
  std::size_t repetitions = 0;
};

struct ModelScore {
  std::string id;
  std::string stage;
  double valid_rmse = 0.0;
};

struct TrainingReport {
  std::string mode;
  std::string validation;  // "kfold-5" or "holdout-0.8"
  std::uint64_t seed = 0;
  double budget_seconds = 0.0;
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
  std::vector<std::string> test_groups;
  std::vector<ModelScore> models;
  std::vector<std::string> steps_run;
  std::vector<std::string> steps_skipped;
  double ensemble_valid_rmse = 0.0;
  double test_mae = 0.0;
  double test_r2 = 0.0;
  double test_rmse = 0.0;
  // Mean |prediction - target| of the bundle over every input row.
  double table_mae = 0.0;
};

struct EnsembleBundle {
  std::string target_name = std::string(features::kTargetColumn);
  std::string metrics_tier;
  std::string extractor_provenance;
  std::vector<std::string> raw_features;
  std::optional<features::KMeansAugmentation> kmeans;
  std::vector<features::GoldenFeatureDef> golden;
  std::vector<std::string> selected_features;
  std::vector<std::string> stack_inputs;  // model ids whose predictions become stack_<id> columns
  std::vector<TrainedModel> models;       // members and their stacking inputs
  std::vector<EnsembleMember> members;
  TrainingReport report;

  const TrainedModel& model(const std::string& id) const;
};

std::string stack_column(const std::string& model_id);

// Raw feature table -> every derived column the bundle's models may read
// (K-Means distances, golden features, stacking predictions).
features::FeatureTable augment(const EnsembleBundle& bundle, const features::FeatureTable& raw);

// Unclamped ensemble output on an augmented table.
std::vector<double> ensemble_raw(const EnsembleBundle& bundle, const features::FeatureTable& augmented);

// Predicted DISTS clamped to [0, 1]. Missing raw columns raise
// InvalidArgument naming the column.
std::vector<double> predict_bundle(const EnsembleBundle& bundle, const features::FeatureTable& table);

// bundle.json, models/<id>.json, extractor.prov. JSON keys are sorted.
void save_bundle(const EnsembleBundle& bundle, const std::filesystem::path& dir);
EnsembleBundle load_bundle(const std::filesystem::path& dir);

nlohmann::json bundle_to_json(const EnsembleBundle& bundle);
nlohmann::json report_to_json(const TrainingReport& report);

double mean_absolute_error(std::span<const double> pred, std::span<const double> target);
double r2_score(std::span<const double> pred, std::span<const double> target);

}  // namespace mmf::automl
