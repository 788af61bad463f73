// mmf: score, train, predict and gate image translations.
#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "mmf/automl/pipeline.hpp"
#include "mmf/bench/bench.hpp"
#include "mmf/common/error.hpp"
#include "mmf/deepsim/extractor.hpp"
#include "mmf/features/features.hpp"
#include "mmf/imgio/codec.hpp"
#include "mmf/metrics/registry.hpp"
#include "mmf/synthgen/synthgen.hpp"
#include "mmf/vismaps/vismaps.hpp"

namespace fs = std::filesystem;
using namespace mmf;

namespace {

constexpr const char* kVersion = "1.0.0";

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRejected = 2;
constexpr int kExitRuntime = 3;

struct Globals {
  std::uint64_t seed = 42;
  int threads = -1;
  std::string extractor;
  bool quiet = false;
};

deepsim::FeatureExtractor load_fx(const Globals& g) {
  return g.extractor.empty() ? deepsim::make_tiny_v1() : deepsim::load_extractor(g.extractor);
}

void apply_threads(const Globals& g) {
  int n = g.threads;
  if (n < 0) {
    n = 0;
    if (const char* env = std::getenv("MMF_THREADS")) {
      try {
        n = std::stoi(env);
      } catch (...) {
        throw InvalidArgument(std::string("MMF_THREADS is not an integer: ") + env);
      }
    }
  }
  if (n < 0) throw InvalidArgument("thread count must be >= 0");
  if (n > 0) omp_set_num_threads(n);
}

metrics::BatteryTier tier_of(const std::string& s) { return metrics::parse_battery_tier(s); }

std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot write " + p.string());
  return out;
}

// Cheapest battery that covers every raw feature the bundle needs.
metrics::BatteryTier tier_for(const automl::EnsembleBundle& b) {
  const auto core = metrics::battery_metrics(metrics::BatteryTier::core);
  for (const auto& f : b.raw_features)
    if (std::find(core.begin(), core.end(), f) == core.end()) return metrics::BatteryTier::full;
  return metrics::BatteryTier::core;
}

features::TripletManifest limited(features::TripletManifest m, std::size_t limit) {
  if (limit > 0 && m.records.size() > limit) m.records.resize(limit);
  return m;
}

void warn_provenance(const automl::EnsembleBundle& b, const deepsim::FeatureExtractor& fx) {
  if (b.extractor_provenance != fx.provenance)
    std::cerr << "warning: bundle was trained with extractor '" << b.extractor_provenance << "', scoring with '"
              << fx.provenance << "'\n";
}

// FNV-1a of bundle.json; identifies the bundle in gate reports.
std::string bundle_id(const fs::path& dir) {
  std::ifstream in(dir / "bundle.json", std::ios::binary);
  std::uint64_t h = 1469598103934665603ull;
  char c;
  while (in.get(c)) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

features::FeatureTable score_without_target(features::TripletManifest m, metrics::BatteryTier tier,
                                            const deepsim::FeatureExtractor& fx) {
  for (auto& r : m.records) r.ground_truth.reset();
  return features::build_feature_table(m, tier, fx);
}

// ---- commands ----

int cmd_metrics_list() {
  std::printf("%-10s %-3s %-9s %-12s %8s  %s\n", "metric", "", "tier", "status", "cost", "range");
  for (const auto& d : metrics::registry()) {
    std::printf("%-10s %-3s %-9s %-12s %8.1f  [%g, %g]  %s\n", d.name.c_str(),
                std::string(metrics::arrow(d.polarity)).c_str(), std::string(metrics::to_string(d.tier)).c_str(),
                d.implemented ? "implemented" : "registered", d.nominal_cost, d.range_min, d.range_max,
                d.description.c_str());
  }
  return kExitOk;
}

int cmd_score(const Globals& g, const std::string& manifest, const std::string& tier, const std::string& out) {
  const auto fx = load_fx(g);
  const auto m = features::read_manifest(manifest);
  const auto table = features::build_feature_table(m, tier_of(tier), fx);
  auto os = open_out(out);
  features::write_csv(table, os);
  if (!g.quiet) std::cerr << "scored " << table.rows() << " records x " << table.cols() << " metrics -> " << out << '\n';
  return kExitOk;
}

int cmd_train(const Globals& g, const std::string& features_csv, double budget, const std::string& mode,
              const std::string& out) {
  const auto table = features::read_csv(fs::path(features_csv));
  if (!table.has_target()) throw InvalidArgument(features_csv + ": no target_dists column; cannot train");
  automl::PipelineOptions o;
  o.budget_seconds = budget;
  o.seed = g.seed;
  o.mode = automl::parse_train_mode(mode);
  o.verbose = !g.quiet;
  const auto fx = load_fx(g);
  // The tier label is derived from the columns so bundles record what they saw.
  std::string tier = "custom";
  for (auto t : {metrics::BatteryTier::core, metrics::BatteryTier::full})
    if (table.columns() == metrics::battery_metrics(t)) tier = std::string(metrics::to_string(t));
  const auto bundle = automl::train_pipeline(table, o, tier, fx.provenance);
  automl::save_bundle(bundle, out);
  std::printf("test MAE %.5f  test r2 %.4f  test RMSE %.5f  (%zu test rows, %s)\n", bundle.report.test_mae,
              bundle.report.test_r2, bundle.report.test_rmse, bundle.report.test_rows,
              bundle.report.validation.c_str());
  return kExitOk;
}

int cmd_predict(const Globals& g, const std::string& bundle_dir, const std::string& features_csv,
                const std::string& manifest, const std::string& out) {
  const auto bundle = automl::load_bundle(bundle_dir);
  features::FeatureTable table;
  if (!features_csv.empty()) {
    table = features::read_csv(fs::path(features_csv));
  } else {
    const auto fx = load_fx(g);
    warn_provenance(bundle, fx);
    const auto m = features::read_manifest(manifest);
    table = features::build_feature_table(m, tier_for(bundle), fx);
  }
  const auto pred = automl::predict_bundle(bundle, table);
  table.add_column("predicted_dists", pred);
  auto os = open_out(out);
  features::write_csv(table, os);
  if (!g.quiet && table.has_target())
    std::cerr << "mean |prediction - target| = " << automl::mean_absolute_error(pred, table.target()) << '\n';
  return kExitOk;
}

int cmd_gate(const Globals& g, const std::string& manifest, const std::string& bundle_dir, double threshold,
             bool strict, const std::string& out) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw InvalidArgument("--threshold must be in [0,1]");
  const auto bundle = automl::load_bundle(bundle_dir);
  const auto fx = load_fx(g);
  warn_provenance(bundle, fx);
  const auto m = features::read_manifest(manifest);
  const auto table = score_without_target(m, tier_for(bundle), fx);
  const auto pred = automl::predict_bundle(bundle, table);

  nlohmann::ordered_json rep;
  rep["bundle"] = {{"id", bundle_id(bundle_dir)},
                   {"extractor_provenance", bundle.extractor_provenance},
                   {"metrics_tier", bundle.metrics_tier}};
  rep["threshold"] = threshold;
  auto samples = nlohmann::ordered_json::array();
  std::size_t accepted = 0;
  double mean = 0.0;
  for (std::size_t r = 0; r < table.rows(); ++r) {
    const bool ok = pred[r] <= threshold;
    accepted += ok;
    mean += pred[r];
    samples.push_back({{"sample_id", table.sample_id(r)},
                       {"model_id", table.model_id(r)},
                       {"predicted_dists", pred[r]},
                       {"threshold", threshold},
                       {"decision", ok ? "accept" : "reject"}});
  }
  const std::size_t n = table.rows();
  mean = n ? mean / static_cast<double>(n) : 0.0;
  double var = 0.0;
  for (double p : pred) var += (p - mean) * (p - mean);
  const double sd = n ? std::sqrt(var / static_cast<double>(n)) : 0.0;
  rep["summary"] = {{"count", n},
                    {"accepted", accepted},
                    {"rejected", n - accepted},
                    {"mean_predicted_dists", mean},
                    {"std_predicted_dists", sd}};
  rep["samples"] = samples;
  if (out.empty()) {
    std::cout << rep.dump(1) << '\n';
  } else {
    auto os = open_out(out);
    os << rep.dump(1) << '\n';
  }
  if (!g.quiet) std::cerr << "gate: " << accepted << " accepted, " << (n - accepted) << " rejected at threshold " << threshold << '\n';
  return strict && accepted < n ? kExitRejected : kExitOk;
}

int cmd_maps(const Globals& g, const std::string& manifest, const std::string& a, const std::string& b,
             const std::string& name, const std::vector<std::string>& which, const std::string& out) {
  auto emit = [&](const imgio::ImageTensor& x, const imgio::ImageTensor& y, const fs::path& dir, const std::string& id) {
    fs::create_directories(dir);
    for (const auto& metric : which) {
      auto map = vismaps::compute_map(metric, x, y);
      map.pair_id = id;
      vismaps::write_map(map, dir / (id + "_" + metric + ".png"));
    }
  };
  for (const auto& metric : which)
    if (std::find(vismaps::map_names().begin(), vismaps::map_names().end(), metric) == vismaps::map_names().end())
      throw InvalidArgument("no visibility map for metric '" + metric + "' (expected ssim, mae or tv_ratio)");
  std::size_t count = 0;
  if (!manifest.empty()) {
    const auto m = features::read_manifest(manifest);
    for (const auto& r : m.records) {
      const auto src = imgio::decode(r.source);
      const auto tr = imgio::decode(r.translated);
      emit(src, tr, fs::path(out) / r.model_id, r.sample_id);
      ++count;
    }
  } else {
    if (a.empty() || b.empty()) throw InvalidArgument("maps needs --manifest or both --a and --b");
    emit(imgio::decode(a), imgio::decode(b), out, name);
    ++count;
  }
  if (!g.quiet) std::cerr << "wrote maps for " << count << " pair(s) under " << out << '\n';
  return kExitOk;
}

int cmd_bench(const Globals& g, const std::string& manifest, std::size_t reps, const std::string& tier,
              std::size_t limit, const std::string& csv, bool timed) {
  const auto fx = load_fx(g);
  const auto m = limited(features::read_manifest(manifest), limit);
  const auto rep = timed ? bench::run_bench(m, reps, tier_of(tier), fx) : bench::run_stats(m, tier_of(tier), fx);
  bench::write_table(rep, std::cout);
  if (!csv.empty()) {
    auto os = open_out(csv);
    bench::write_csv(rep, os);
  }
  return kExitOk;
}

int cmd_tradeoff(const std::string& full, const std::string& reduced, const std::string& features_csv,
                 const std::string& bench_csv) {
  const auto bf = automl::load_bundle(full);
  const auto br = automl::load_bundle(reduced);
  const auto table = features::read_csv(fs::path(features_csv));
  std::ifstream in(bench_csv);
  if (!in) throw IoError("cannot read " + bench_csv);
  std::string line;
  std::getline(in, line);
  std::vector<std::pair<std::string, double>> ms;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string name, pol, mean;
    std::getline(ss, name, ',');
    std::getline(ss, pol, ',');
    std::getline(ss, mean, ',');
    ms.emplace_back(name, features::parse_double(mean));
  }
  bench::write_tradeoff(bench::tradeoff_report(bf, br, table, ms), std::cout);
  return kExitOk;
}

int cmd_synth(const Globals& g, const std::string& out, std::size_t sources, std::size_t models, int size) {
  synthgen::SynthSpec spec;
  spec.n_sources = sources;
  spec.n_models = models;
  spec.seed = g.seed;
  spec.size = size;
  const auto m = synthgen::generate(spec, out);
  if (!g.quiet) std::cerr << "wrote " << m.records.size() << " records to " << (fs::path(out) / "manifest.jsonl").string() << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-method fusion quality gate for image-to-image translation outputs"};
  app.name("mmf");
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads (0 = auto; default from MMF_THREADS)");
  app.add_option("--extractor", g.extractor, "Feature extractor file (.mmfx); default: built-in tiny-v1");
  app.add_flag("--quiet,-q", g.quiet, "No progress output on stderr");
  bool version = false;
  app.add_flag("--version", version, "Print version and extractor provenance");

  auto* metrics_cmd = app.add_subcommand("metrics", "Metric registry");
  metrics_cmd->require_subcommand(1);
  auto* list_cmd = metrics_cmd->add_subcommand("list", "List registered metrics");

  std::string manifest, out, tier = "core", features_csv, bundle_dir, mode = "compete", a, b, name = "pair",
                            csv, full_dir, reduced_dir, bench_csv;
  double budget = 600.0, threshold = -1.0;
  bool strict = false;
  std::size_t reps = 50, limit = 0, sources = 120, models = 8;
  int size = 256;
  std::vector<std::string> which = vismaps::map_names();

  auto* score = app.add_subcommand("score", "Compute the metric battery for every manifest record");
  score->add_option("--manifest", manifest, "JSON-lines manifest")->required();
  score->add_option("--tier", tier, "core or full")->check(CLI::IsMember({"core", "full"}))->capture_default_str();
  score->add_option("--out", out, "Feature CSV")->required();

  auto* train = app.add_subcommand("train", "Train the ensemble on a feature CSV");
  train->add_option("--features", features_csv, "Feature CSV with target_dists")->required();
  train->add_option("--budget", budget, "Wall-clock budget in seconds")->capture_default_str();
  train->add_option("--mode", mode, "compete or fast")->check(CLI::IsMember({"compete", "fast"}))->capture_default_str();
  train->add_option("--out", out, "Bundle directory")->required();

  auto* predict = app.add_subcommand("predict", "Predict DISTS with a trained bundle");
  predict->add_option("--bundle", bundle_dir, "Bundle directory")->required();
  auto* pf = predict->add_option("--features", features_csv, "Feature CSV");
  auto* pm = predict->add_option("--manifest", manifest, "Manifest to score first");
  pf->excludes(pm);
  predict->add_option("--out", out, "Output CSV")->required();

  auto* gate = app.add_subcommand("gate", "Accept or reject translations by predicted DISTS");
  gate->add_option("--manifest", manifest, "Manifest (ground truth not needed)")->required();
  gate->add_option("--bundle", bundle_dir, "Bundle directory")->required();
  gate->add_option("--threshold", threshold, "Accept when predicted DISTS <= threshold")->required();
  gate->add_flag("--strict", strict, "Exit 2 when any record is rejected");
  gate->add_option("--out", out, "Report JSON (default: stdout)");

  auto* maps = app.add_subcommand("maps", "Write error visibility maps (darker = more error)");
  auto* mm = maps->add_option("--manifest", manifest, "Manifest; maps go to <out>/<model_id>/<sample_id>_<metric>.png");
  maps->add_option("--a", a, "Input image")->excludes(mm);
  maps->add_option("--b", b, "Output image")->excludes(mm);
  maps->add_option("--name", name, "Identifier for --a/--b maps")->capture_default_str();
  maps->add_option("--metrics", which, "Subset of ssim, mae, tv_ratio")->delimiter(',');
  maps->add_option("--out", out, "Output directory")->required();

  auto* bench_cmd = app.add_subcommand("bench", "Per-metric timing and score statistics");
  bench_cmd->add_option("--manifest", manifest, "Manifest with ground truth")->required();
  bench_cmd->add_option("--reps", reps, "Timed repetitions per metric")->capture_default_str();
  bench_cmd->add_option("--tier", tier, "core or full")->check(CLI::IsMember({"core", "full"}))->capture_default_str();
  bench_cmd->add_option("--limit", limit, "Use only the first N records");
  bench_cmd->add_option("--csv", csv, "Also write CSV");

  auto* stats = app.add_subcommand("stats", "Score statistics per pairing (no timing)");
  stats->add_option("--manifest", manifest, "Manifest with ground truth")->required();
  stats->add_option("--tier", tier, "core or full")->check(CLI::IsMember({"core", "full"}))->capture_default_str();
  stats->add_option("--limit", limit, "Use only the first N records");
  stats->add_option("--csv", csv, "Also write CSV");

  auto* tradeoff = app.add_subcommand("tradeoff", "Compare a full and a reduced bundle on their test groups");
  tradeoff->add_option("--full", full_dir, "Bundle trained on the full metric set")->required();
  tradeoff->add_option("--reduced", reduced_dir, "Bundle trained on the reduced set")->required();
  tradeoff->add_option("--features", features_csv, "Feature CSV containing the test groups")->required();
  tradeoff->add_option("--bench-csv", bench_csv, "bench CSV with per-metric timings")->required();

  auto* synth = app.add_subcommand("synth", "Generate a synthetic triplet dataset");
  synth->add_option("--out", out, "Output directory")->required();
  synth->add_option("--sources", sources, "Source images")->capture_default_str();
  synth->add_option("--models", models, "Simulated models, including the perfect one")->capture_default_str();
  synth->add_option("--size", size, "Image side in pixels")->capture_default_str();

  // --version must work without a subcommand.
  for (int i = 1; i < argc; ++i)
    if (std::string(argv[i]) == "--version") {
      app.require_subcommand(0);
      break;
    }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (version) {
      std::printf("mmf %s\n", kVersion);
      std::printf("extractor: %s\n", load_fx(g).provenance.c_str());
      return kExitOk;
    }
    apply_threads(g);
    if (list_cmd->parsed()) return cmd_metrics_list();
    if (score->parsed()) return cmd_score(g, manifest, tier, out);
    if (train->parsed()) return cmd_train(g, features_csv, budget, mode, out);
    if (predict->parsed()) {
      if (features_csv.empty() == manifest.empty()) throw InvalidArgument("predict needs exactly one of --features, --manifest");
      return cmd_predict(g, bundle_dir, features_csv, manifest, out);
    }
    if (gate->parsed()) return cmd_gate(g, manifest, bundle_dir, threshold, strict, out);
    if (maps->parsed()) return cmd_maps(g, manifest, a, b, name, which, out);
    if (bench_cmd->parsed()) return cmd_bench(g, manifest, reps, tier, limit, csv, true);
    if (stats->parsed()) return cmd_bench(g, manifest, 0, tier, limit, csv, false);
    if (tradeoff->parsed()) return cmd_tradeoff(full_dir, reduced_dir, features_csv, bench_csv);
    if (synth->parsed()) return cmd_synth(g, out, sources, models, size);
    std::cerr << app.help();
    return kExitUsage;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
