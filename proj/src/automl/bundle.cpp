#include "mmf/automl/bundle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "mmf/automl/search.hpp"
#include "mmf/common/error.hpp"
#include "mmf/gbdt/model_io.hpp"

namespace mmf::automl {

using features::FeatureTable;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kBundleVersion = 1;

json read_json(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw InvalidArgument(p.string() + ": " + e.what());
  }
}

void write_json(const json& j, const fs::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot write " + p.string());
  out << j.dump(1) << '\n';
  if (!out) throw IoError("write failed: " + p.string());
}

json kmeans_to_json(const features::KMeansAugmentation& k) {
  return {{"columns", k.columns}, {"mean", k.mean}, {"stddev", k.stddev}, {"centers", k.centers}};
}

features::KMeansAugmentation kmeans_from_json(const json& j) {
  features::KMeansAugmentation k;
  k.columns = j.at("columns").get<std::vector<std::string>>();
  k.mean = j.at("mean").get<std::vector<double>>();
  k.stddev = j.at("stddev").get<std::vector<double>>();
  k.centers = j.at("centers").get<std::vector<std::vector<double>>>();
  return k;
}

json golden_to_json(const features::GoldenFeatureDef& d) {
  return {{"name", d.name()},   {"left", d.left},   {"right", d.right},
          {"op", std::string(features::to_string(d.op))}, {"score", d.score},
          {"lower", d.lower},   {"upper", d.upper}};
}

features::GoldenFeatureDef golden_from_json(const json& j) {
  features::GoldenFeatureDef d;
  d.left = j.at("left").get<std::string>();
  d.right = j.at("right").get<std::string>();
  d.op = features::parse_golden_op(j.at("op").get<std::string>());
  d.score = j.at("score").get<double>();
  d.lower = j.at("lower").get<double>();
  d.upper = j.at("upper").get<double>();
  return d;
}

TrainingReport report_from_json(const json& j) {
  TrainingReport r;
  r.mode = j.at("mode").get<std::string>();
  r.validation = j.at("validation").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.budget_seconds = j.at("budget_seconds").get<double>();
  r.train_rows = j.at("train_rows").get<std::size_t>();
  r.test_rows = j.at("test_rows").get<std::size_t>();
  r.test_groups = j.at("test_groups").get<std::vector<std::string>>();
  for (const auto& m : j.at("models"))
    r.models.push_back({m.at("id").get<std::string>(), m.at("stage").get<std::string>(),
                        m.at("valid_rmse").get<double>()});
  r.steps_run = j.at("steps_run").get<std::vector<std::string>>();
  r.steps_skipped = j.at("steps_skipped").get<std::vector<std::string>>();
  r.ensemble_valid_rmse = j.at("ensemble_valid_rmse").get<double>();
  r.test_mae = j.at("test_mae").get<double>();
  r.test_r2 = j.at("test_r2").get<double>();
  r.test_rmse = j.at("test_rmse").get<double>();
  r.table_mae = j.at("table_mae").get<double>();
  return r;
}

}  // namespace

std::vector<double> TrainedModel::predict(const FeatureTable& augmented) const {
  if (folds.empty()) throw InvalidArgument("model " + id + " has no fitted folds");
  const auto view = augmented.select_columns(columns);
  std::vector<double> out(augmented.rows(), 0.0);
  for (const auto& f : folds) {
    const auto p = f.predict(view);
    for (std::size_t r = 0; r < out.size(); ++r) out[r] += p[r];
  }
  for (double& v : out) v /= static_cast<double>(folds.size());
  return out;
}

const TrainedModel& EnsembleBundle::model(const std::string& id) const {
  for (const auto& m : models)
    if (m.id == id) return m;
  throw InvalidArgument("bundle has no model '" + id + "'");
}

std::string stack_column(const std::string& model_id) { return "stack_" + model_id; }

FeatureTable augment(const EnsembleBundle& bundle, const FeatureTable& raw) {
  FeatureTable t = raw.select_columns(bundle.raw_features);
  if (bundle.kmeans) t = bundle.kmeans->apply(t);
  t = features::append_golden(t, bundle.golden);
  std::vector<std::pair<std::string, std::vector<double>>> stacked;
  for (const auto& id : bundle.stack_inputs) stacked.emplace_back(stack_column(id), bundle.model(id).predict(t));
  for (auto& [name, v] : stacked) t.add_column(name, std::move(v));
  return t;
}

std::vector<double> ensemble_raw(const EnsembleBundle& bundle, const FeatureTable& augmented) {
  if (bundle.members.empty()) throw InvalidArgument("bundle has no ensemble members");
  std::vector<std::vector<double>> preds;
  std::vector<std::size_t> counts;
  for (const auto& m : bundle.members) {
    preds.push_back(bundle.model(m.model_id).predict(augmented));
    counts.push_back(m.repetitions);
  }
  return weighted_mean(preds, counts);
}

std::vector<double> predict_bundle(const EnsembleBundle& bundle, const FeatureTable& table) {
  auto p = ensemble_raw(bundle, augment(bundle, table));
  for (double& v : p) v = std::clamp(v, 0.0, 1.0);
  return p;
}

double mean_absolute_error(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size() || pred.empty()) throw InvalidArgument("mae: bad lengths");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += std::abs(pred[i] - target[i]);
  return s / static_cast<double>(pred.size());
}

double r2_score(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size() || pred.empty()) throw InvalidArgument("r2: bad lengths");
  double mean = 0.0;
  for (double v : target) mean += v;
  mean /= static_cast<double>(target.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    ss_res += (target[i] - pred[i]) * (target[i] - pred[i]);
    ss_tot += (target[i] - mean) * (target[i] - mean);
  }
  return ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 0.0;
}

json report_to_json(const TrainingReport& r) {
  json models = json::array();
  for (const auto& m : r.models) models.push_back({{"id", m.id}, {"stage", m.stage}, {"valid_rmse", m.valid_rmse}});
  return {{"mode", r.mode},
          {"validation", r.validation},
          {"seed", r.seed},
          {"budget_seconds", r.budget_seconds},
          {"train_rows", r.train_rows},
          {"test_rows", r.test_rows},
          {"test_groups", r.test_groups},
          {"models", models},
          {"steps_run", r.steps_run},
          {"steps_skipped", r.steps_skipped},
          {"ensemble_valid_rmse", r.ensemble_valid_rmse},
          {"test_mae", r.test_mae},
          {"test_r2", r.test_r2},
          {"test_rmse", r.test_rmse},
          {"table_mae", r.table_mae}};
}

json bundle_to_json(const EnsembleBundle& b) {
  json golden = json::array();
  for (const auto& d : b.golden) golden.push_back(golden_to_json(d));
  json models = json::array();
  for (const auto& m : b.models)
    models.push_back({{"id", m.id},
                      {"stage", m.stage},
                      {"columns", m.columns},
                      {"weighted", m.weighted},
                      {"valid_rmse", m.valid_rmse},
                      {"config", gbdt::config_to_json(m.config)},
                      {"folds", m.folds.size()},
                      {"file", "models/" + m.id + ".json"}});
  json members = json::array();
  for (const auto& m : b.members) members.push_back({{"model", m.model_id}, {"repetitions", m.repetitions}});
  return {{"format", "mmf-bundle"},
          {"version", kBundleVersion},
          {"target_name", b.target_name},
          {"metrics_tier", b.metrics_tier},
          {"extractor_provenance", b.extractor_provenance},
          {"preprocessing",
           {{"raw_features", b.raw_features},
            {"kmeans", b.kmeans ? kmeans_to_json(*b.kmeans) : json(nullptr)},
            {"golden_features", golden},
            {"selected_features", b.selected_features},
            {"stack_inputs", b.stack_inputs}}},
          {"members", members},
          {"models", models},
          {"report", report_to_json(b.report)}};
}

void save_bundle(const EnsembleBundle& b, const fs::path& dir) {
  fs::create_directories(dir / "models");
  for (const auto& m : b.models) {
    json folds = json::array();
    for (const auto& f : m.folds) folds.push_back(gbdt::model_to_json(f));
    write_json({{"id", m.id}, {"folds", folds}}, dir / "models" / (m.id + ".json"));
  }
  write_json(bundle_to_json(b), dir / "bundle.json");
  std::ofstream prov(dir / "extractor.prov", std::ios::binary);
  if (!prov) throw IoError("cannot write " + (dir / "extractor.prov").string());
  prov << b.extractor_provenance << '\n';
}

EnsembleBundle load_bundle(const fs::path& dir) {
  const json j = read_json(dir / "bundle.json");
  try {
    if (j.at("format") != "mmf-bundle") throw InvalidArgument("not a model bundle: " + dir.string());
    if (j.at("version").get<int>() != kBundleVersion) throw InvalidArgument("unsupported bundle version");
    EnsembleBundle b;
    b.target_name = j.at("target_name").get<std::string>();
    b.metrics_tier = j.at("metrics_tier").get<std::string>();
    b.extractor_provenance = j.at("extractor_provenance").get<std::string>();
    const auto& pre = j.at("preprocessing");
    b.raw_features = pre.at("raw_features").get<std::vector<std::string>>();
    if (!pre.at("kmeans").is_null()) b.kmeans = kmeans_from_json(pre.at("kmeans"));
    for (const auto& g : pre.at("golden_features")) b.golden.push_back(golden_from_json(g));
    b.selected_features = pre.at("selected_features").get<std::vector<std::string>>();
    b.stack_inputs = pre.at("stack_inputs").get<std::vector<std::string>>();
    for (const auto& mj : j.at("models")) {
      TrainedModel m;
      m.id = mj.at("id").get<std::string>();
      m.stage = mj.at("stage").get<std::string>();
      m.columns = mj.at("columns").get<std::vector<std::string>>();
      m.weighted = mj.at("weighted").get<bool>();
      m.valid_rmse = mj.at("valid_rmse").get<double>();
      m.config = gbdt::config_from_json(mj.at("config"));
      const json fj = read_json(dir / mj.at("file").get<std::string>());
      for (const auto& f : fj.at("folds")) m.folds.push_back(gbdt::model_from_json(f));
      if (m.folds.size() != mj.at("folds").get<std::size_t>())
        throw InvalidArgument("model " + m.id + ": fold count mismatch");
      b.models.push_back(std::move(m));
    }
    for (const auto& mj : j.at("members"))
      b.members.push_back({mj.at("model").get<std::string>(), mj.at("repetitions").get<std::size_t>()});
    b.report = report_from_json(j.at("report"));
    for (const auto& m : b.members) b.model(m.model_id);
    return b;
  } catch (const json::exception& e) {
    throw InvalidArgument(dir.string() + "/bundle.json: " + e.what());
  }
}

}  // namespace mmf::automl
