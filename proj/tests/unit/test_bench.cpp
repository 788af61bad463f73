#include <cmath>
#include <set>
#include <sstream>

#include <doctest.h>

#include "mmf/automl/pipeline.hpp"
#include "mmf/bench/bench.hpp"
#include "mmf/common/error.hpp"
#include "mmf/imgio/codec.hpp"
#include "support.hpp"

using namespace mmf;
using features::PairRecord;
using features::TripletManifest;

namespace {

const deepsim::FeatureExtractor& fx() {
  static const auto f = deepsim::make_tiny_v1();
  return f;
}

// n triplets; `same` writes one image used for all three roles.
TripletManifest write_triplets(const test::TempDir& dir, int n, bool same) {
  TripletManifest m;
  for (int i = 0; i < n; ++i) {
    const auto id = "s" + std::to_string(i);
    const auto src = dir / (id + "_src.png"), tr = dir / (id + "_tr.png"), gt = dir / (id + "_gt.png");
    const auto base = test::textured_image(64, 64, 3, static_cast<std::uint64_t>(i));
    imgio::encode_png(base, src);
    imgio::encode_png(same ? base : test::textured_image(64, 64, 3, 100 + i), tr);
    imgio::encode_png(same ? base : test::textured_image(64, 64, 3, 200 + i), gt);
    m.records.push_back({id, "m", src, tr, gt});
  }
  return m;
}

std::size_t count(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("bench report shape and timings") {
  test::TempDir dir("bench");
  const auto m = write_triplets(dir, 3, false);
  const auto rep = bench::run_bench(m, 4, metrics::BatteryTier::core, fx());
  const auto names = metrics::battery_metrics(metrics::BatteryTier::core);
  REQUIRE(rep.rows.size() == names.size());
  CHECK(rep.triplets == 3);
  CHECK(rep.repetitions == 4);
  CHECK(rep.tier == "core");
  CHECK(rep.timed);
  double core = 0;
  for (std::size_t i = 0; i < names.size(); ++i) {
    const auto& r = rep.rows[i];
    CHECK(r.name == names[i]);
    CHECK(r.time_ms.mean >= 0.0);
    CHECK(r.time_ms.std >= 0.0);
    for (const auto& s : r.scores) {
      CHECK(std::isfinite(s.mean));
      CHECK(s.std >= 0.0);
    }
    core += r.time_ms.mean;
  }
  CHECK(rep.core_combined_ms == doctest::Approx(core));

  // Scores do not depend on the repetition count and match the untimed run.
  const auto again = bench::run_bench(m, 1, metrics::BatteryTier::core, fx());
  const auto stats = bench::run_stats(m, metrics::BatteryTier::core, fx());
  CHECK_FALSE(stats.timed);
  for (std::size_t i = 0; i < names.size(); ++i)
    for (std::size_t p = 0; p < 3; ++p) {
      CHECK(again.rows[i].scores[p].mean == rep.rows[i].scores[p].mean);
      CHECK(stats.rows[i].scores[p].mean == rep.rows[i].scores[p].mean);
      CHECK(stats.rows[i].scores[p].std == rep.rows[i].scores[p].std);
    }

  std::ostringstream csv, table, scsv;
  bench::write_csv(rep, csv);
  bench::write_table(rep, table);
  bench::write_csv(stats, scsv);
  std::istringstream lines(csv.str());
  std::string header, line;
  std::getline(lines, header);
  CHECK(header.rfind("metric,polarity,time_ms_mean,time_ms_std,source_vs_gt_mean", 0) == 0);
  std::size_t n = 0;
  while (std::getline(lines, line)) {
    ++n;
    CHECK(count(line, ",") == count(header, ","));
  }
  CHECK(n == names.size());
  CHECK(scsv.str().find("time_ms") == std::string::npos);
  CHECK(count(table.str(), "↑") + count(table.str(), "↓") == names.size());
  CHECK(table.str().find("core-tier combined time") != std::string::npos);

  CHECK_THROWS_AS(bench::run_bench(m, 0, metrics::BatteryTier::core, fx()), InvalidArgument);
  auto nogt = m;
  for (auto& r : nogt.records) r.ground_truth.reset();
  CHECK_THROWS_AS(bench::run_stats(nogt, metrics::BatteryTier::core, fx()), InvalidArgument);
  CHECK_THROWS_AS(bench::run_stats(TripletManifest{}, metrics::BatteryTier::core, fx()), InvalidArgument);
}

TEST_CASE("identical triplets score as identical on every pairing") {
  test::TempDir dir("bench");
  const auto rep = bench::run_stats(write_triplets(dir, 2, true), metrics::BatteryTier::full, fx());
  for (const auto& r : rep.rows) {
    CHECK(r.scores[0].mean == r.scores[1].mean);
    CHECK(r.scores[1].mean == r.scores[2].mean);
    if (r.name == "dists" || r.name == "lpips" || r.name == "mae" || r.name == "gmsd")
      for (const auto& s : r.scores) CHECK(s.mean == doctest::Approx(0.0).scale(1).epsilon(1e-9));
    if (r.name == "ssim" || r.name == "tv_ratio")
      for (const auto& s : r.scores) CHECK(s.mean == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("summarize") {
  CHECK(bench::summarize({}).mean == 0.0);
  CHECK(bench::summarize({3.0}).std == 0.0);
  const auto s = bench::summarize({1, 2, 3, 4});
  CHECK(s.mean == 2.5);
  CHECK(s.std == doctest::Approx(std::sqrt(5.0 / 3.0)));
}

TEST_CASE("tradeoff report") {
  Rng rng(9);
  features::FeatureTable t({"psnr", "ssim", "fsim"});
  for (int g = 0; g < 30; ++g)
    for (int m = 0; m < 3; ++m) {
      const std::vector<double> v{uniform01(rng), uniform01(rng), uniform01(rng)};
      const auto id = "g" + std::to_string(g);
      t.add_row(id, "m" + std::to_string(m), id, v, 0.4 * v[0] + 0.4 * v[2] + 0.05 * uniform01(rng));
    }
  automl::PipelineOptions o;
  o.mode = automl::TrainMode::fast;
  const auto full = automl::train_pipeline(t, o, "full", "tiny-v1");
  const auto reduced = automl::train_pipeline(t.select_columns({"psnr", "ssim"}), o, "core", "tiny-v1");
  const std::vector<std::pair<std::string, double>> ms{{"psnr", 1.0}, {"ssim", 2.0}, {"fsim", 50.0}};

  const auto self = bench::tradeoff_report(full, full, t, ms);
  CHECK(self.delta_mae == 0.0);
  CHECK(self.delta_r2 == 0.0);
  CHECK(self.delta_ms == 0.0);

  const auto r = bench::tradeoff_report(full, reduced, t, ms);
  CHECK(r.full.metric_ms == 53.0);
  CHECK(r.reduced.metric_ms == 3.0);
  CHECK(r.delta_ms == -50.0);
  CHECK(r.delta_mae == doctest::Approx(r.reduced.test_mae - r.full.test_mae));
  // fsim carries signal the reduced set lacks.
  CHECK(r.delta_mae > 0.0);
  std::ostringstream out;
  bench::write_tradeoff(r, out);
  CHECK(out.str().find("reduced") != std::string::npos);

  o.seed = 43;
  const auto other = automl::train_pipeline(t, o, "full", "tiny-v1");
  REQUIRE(other.report.test_groups != full.report.test_groups);
  CHECK_THROWS_AS(bench::tradeoff_report(full, other, t, ms), InvalidArgument);
  CHECK_THROWS_AS(bench::tradeoff_report(full, reduced, t, {{"psnr", 1.0}}), InvalidArgument);
}
