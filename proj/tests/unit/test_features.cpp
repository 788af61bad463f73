#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <doctest.h>

#include "mmf/common/error.hpp"
#include "mmf/deepsim/extractor.hpp"
#include "mmf/features/features.hpp"
#include "mmf/gbdt/gbdt.hpp"
#include "mmf/imgio/codec.hpp"
#include "mmf/metrics/registry.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace mmf;
using namespace mmf::features;

namespace {

FeatureTable random_table(std::size_t rows, std::size_t cols, std::uint64_t seed, bool target = true) {
  Rng rng(seed);
  std::vector<std::string> names;
  for (std::size_t c = 0; c < cols; ++c) names.push_back("c" + std::to_string(c));
  FeatureTable t(names);
  std::vector<double> v(cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (double& x : v) x = uniform(rng, -1, 1);
    const auto id = "s" + std::to_string(r);
    if (target)
      t.add_row(id, "m", id, v, uniform01(rng));
    else
      t.add_row(id, "m", id, v);
  }
  return t;
}

}  // namespace

TEST_CASE("feature table csv round trip") {
  auto t = random_table(25, 4, 1);
  std::stringstream ss;
  write_csv(t, ss);
  const std::string text = ss.str();
  CHECK(text.rfind("sample_id,model_id,group_id,c0,c1,c2,c3,target_dists\n", 0) == 0);
  CHECK(text.find('\r') == std::string::npos);
  std::stringstream in(text);
  CHECK(read_csv(in) == t);

  auto nt = random_table(5, 2, 2, false);
  std::stringstream s2;
  write_csv(nt, s2);
  CHECK(s2.str().rfind("sample_id,model_id,group_id,c0,c1\n", 0) == 0);
  std::stringstream i2(s2.str());
  const auto back = read_csv(i2);
  CHECK_FALSE(back.has_target());
  CHECK(back == nt);

  for (double v : {0.1, 1.0 / 3.0, 1e-300, 6.02214076e23, -0.0, 123456789.123456789})
    CHECK(parse_double(format_double(v)) == v);
}

TEST_CASE("feature table invariants") {
  FeatureTable t({"a", "b"});
  const double row[2] = {1, 2};
  t.add_row("s", "m", "s", row, 0.5);
  CHECK_THROWS_AS(t.add_row("s2", "m", "s2", row), InvalidArgument);
  CHECK_THROWS_AS(t.index("zzz"), InvalidArgument);
  try {
    t.index("zzz");
  } catch (const InvalidArgument& e) {
    CHECK(std::string(e.what()).find("zzz") != std::string::npos);
  }
  const double bad[2] = {1, NAN};
  FeatureTable u({"a", "b"});
  u.add_row("s", "m", "s", bad);
  CHECK_THROWS_AS(u.validate(), InvalidArgument);
  CHECK_THROWS_AS(FeatureTable({"a", "a"}).validate(), InvalidArgument);
  CHECK_THROWS_AS(FeatureTable({"sample_id"}).validate(), InvalidArgument);
  std::stringstream ss("sample_id,model_id,group_id,a\ns,m,s,nan\n");
  CHECK_THROWS_AS(read_csv(ss), InvalidArgument);
}

TEST_CASE("manifest io") {
  test::TempDir dir("manifest");
  {
    std::ofstream out(dir / "m.jsonl");
    out << R"({"sample_id":"a","model_id":"m1","source":"src/a.png","translated":"/abs/t.png","ground_truth":"gt/a.png"})"
        << "\n\n"
        << R"({"sample_id":"a","model_id":"m2","source":"src/a.png","translated":"t2.png","ground_truth":"gt/a.png"})"
        << "\n";
  }
  const auto m = read_manifest(dir / "m.jsonl");
  REQUIRE(m.records.size() == 2);
  CHECK(m.records[0].source == dir.path() / "src/a.png");
  CHECK(m.records[0].translated == std::filesystem::path("/abs/t.png"));
  CHECK(m.has_ground_truth());

  write_manifest(m, dir / "out.jsonl");
  const auto again = read_manifest(dir / "out.jsonl");
  REQUIRE(again.records.size() == 2);
  CHECK(again.records[1].translated == m.records[1].translated);
  std::ifstream in(dir / "out.jsonl");
  std::string first;
  std::getline(in, first);
  CHECK(first.find("\"src/a.png\"") != std::string::npos);

  {
    std::ofstream out(dir / "dup.jsonl");
    out << R"({"sample_id":"a","model_id":"m","source":"s.png","translated":"t.png"})" << "\n"
        << R"({"sample_id":"a","model_id":"m","source":"s.png","translated":"u.png"})" << "\n";
  }
  CHECK_THROWS_AS(read_manifest(dir / "dup.jsonl"), InvalidArgument);
  {
    std::ofstream out(dir / "bad.jsonl");
    out << "{not json\n";
  }
  CHECK_THROWS_AS(read_manifest(dir / "bad.jsonl"), InvalidArgument);
  CHECK_THROWS_AS(read_manifest(dir / "none.jsonl"), IoError);
}

TEST_CASE("build_feature_table") {
  test::TempDir dir("build");
  const auto src = test::textured_image(64, 64, 3, 1);
  const auto gt = test::textured_image(64, 64, 3, 2);
  const auto tr = test::noise_image(64, 64, 3, 3);
  imgio::encode_png(src, dir / "src.png");
  imgio::encode_png(gt, dir / "gt.png");
  imgio::encode_png(tr, dir / "tr.png");
  imgio::encode_png(test::noise_image(32, 32, 3, 3), dir / "small.png");

  TripletManifest m;
  m.records.push_back({"a", "m1", dir / "src.png", dir / "tr.png", dir / "gt.png"});
  m.records.push_back({"a", "perfect", dir / "src.png", dir / "gt.png", dir / "gt.png"});
  m.records.push_back({"b", "m1", dir / "gt.png", dir / "src.png", dir / "gt.png"});
  const auto fx = deepsim::make_tiny_v1();
  const auto t = build_feature_table(m, metrics::BatteryTier::core, fx);
  CHECK(t.rows() == 3);
  CHECK(t.columns() == metrics::battery_metrics(metrics::BatteryTier::core));
  REQUIRE(t.has_target());
  CHECK(t.target()[1] == 0.0);
  CHECK(t.target()[0] > 0.0);
  for (std::size_t r = 0; r < t.rows(); ++r) CHECK(t.group_id(r) == t.sample_id(r));

  const auto again = build_feature_table(m, metrics::BatteryTier::core, fx);
  std::stringstream s1, s2;
  write_csv(t, s1);
  write_csv(again, s2);
  CHECK(s1.str() == s2.str());

  auto nogt = m;
  for (auto& r : nogt.records) r.ground_truth.reset();
  CHECK_FALSE(build_feature_table(nogt, metrics::BatteryTier::core, fx).has_target());

  auto mixed = m;
  mixed.records[2].ground_truth.reset();
  CHECK_THROWS_AS(build_feature_table(mixed, metrics::BatteryTier::core, fx), InvalidArgument);

  auto shape = m;
  shape.records[0].translated = dir / "small.png";
  CHECK_THROWS(build_feature_table(shape, metrics::BatteryTier::core, fx));

  auto missing = m;
  missing.records[0].translated = dir / "nope.png";
  CHECK_THROWS_AS(build_feature_table(missing, metrics::BatteryTier::core, fx), IoError);
}

TEST_CASE("kmeans augmentation") {
  CHECK(default_kmeans_k(2) == 2);
  CHECK(default_kmeans_k(200) == 10);
  CHECK(default_kmeans_k(100000) == 16);

  auto t = random_table(30, 3, 4);
  CHECK_THROWS_AS(kmeans_augment(t, 1, 0), InvalidArgument);
  CHECK_THROWS_AS(kmeans_augment(t, 31, 0), InvalidArgument);

  // Two blobs at (-5,-5) and (5,5) with unit noise.
  Rng rng(9);
  FeatureTable blobs({"x", "y", "flat"});
  for (int i = 0; i < 400; ++i) {
    const double c = i % 2 ? 5.0 : -5.0;
    const double v[3] = {c + normal(rng), c + normal(rng), 1.0};
    blobs.add_row("s" + std::to_string(i), "m", "s" + std::to_string(i), v);
  }
  const auto [aug_table, aug] = kmeans_augment(blobs, 2, 7);
  CHECK(aug.columns == std::vector<std::string>{"x", "y"});
  REQUIRE(aug.k() == 2);
  // Standardized blob means, computed directly.
  for (int b = 0; b < 2; ++b) {
    std::vector<double> mean(2, 0.0);
    for (std::size_t r = b; r < blobs.rows(); r += 2)
      for (int c = 0; c < 2; ++c) mean[c] += (blobs.value(r, c) - aug.mean[c]) / aug.stddev[c] / 200.0;
    double best = 1e9;
    for (const auto& ctr : aug.centers) best = std::min(best, std::hypot(ctr[0] - mean[0], ctr[1] - mean[1]));
    CHECK(best < 0.1);
  }
  CHECK(aug_table.cols() == 3 + 3);
  const auto cl = aug_table.column("kmeans_cluster");
  for (std::size_t r = 2; r < blobs.rows(); ++r) CHECK(cl[r] == cl[r % 2]);
  CHECK(cl[0] != cl[1]);

  const auto replay = aug.apply(blobs);
  for (std::size_t c = 0; c < replay.cols(); ++c)
    for (std::size_t r = 0; r < replay.rows(); ++r)
      CHECK(std::abs(replay.value(r, c) - aug_table.value(r, c)) <= 1e-12);

  FeatureTable flat({"a"});
  for (int i = 0; i < 10; ++i) {
    const double v = 3.0;
    flat.add_row("s" + std::to_string(i), "m", "s", std::span<const double>(&v, 1));
  }
  CHECK_THROWS_AS(kmeans_augment(flat, 2, 0), InvalidArgument);
}

TEST_CASE("golden feature enumeration") {
  auto t = random_table(40, 2, 5);
  const auto c = golden_candidates(t, 1);
  REQUIRE(c.size() == 5);
  std::set<std::string> names;
  for (const auto& d : c) names.insert(d.name());
  CHECK(names == std::set<std::string>{"gf_c0_subtract_c1", "gf_c0_add_c1", "gf_c0_multiply_c1", "gf_c0_ratio_c1",
                                       "gf_c1_ratio_c0"});
  CHECK(golden_candidates(random_table(30, 6, 1), 1).size() == 15 * 5);
  CHECK_THROWS_AS(golden_candidates(random_table(30, 3, 1, false), 1), InvalidArgument);
  CHECK_THROWS_AS(golden_candidates(random_table(3, 3, 1), 1), InvalidArgument);

  CHECK(golden_combine(GoldenOp::ratio, 1.0, 0.0) == 1e10);
  CHECK(golden_combine(GoldenOp::ratio, 1e10, 1e-12) == 1e15);
  CHECK(golden_combine(GoldenOp::ratio, -1.0, -0.0) == 1e10);
}

TEST_CASE("golden features: constant target ties break by name") {
  auto t = random_table(50, 3, 6);
  t.set_target(std::vector<double>(50, 0.25));
  const auto top = golden_features(t, 100, 3);
  REQUIRE(top.size() == 15);
  for (std::size_t i = 0; i < top.size(); ++i) {
    CHECK(top[i].score == doctest::Approx(0.0).epsilon(1e-20));
    if (i) CHECK(top[i - 1].name() < top[i].name());
  }
}

TEST_CASE("golden features: planted A-B and independent enumeration") {
  const auto t = test::planted_golden_table(300, 8);
  const std::uint64_t seed = 17;
  const auto lib = golden_features(t, 1000, seed);
  REQUIRE(!lib.empty());
  CHECK(lib[0].left == "A");
  CHECK(lib[0].right == "B");
  CHECK(lib[0].op == GoldenOp::subtract);
  // Eight leaves cannot interpolate a continuous target; the planted pair
  // still explains almost all of its variance.
  double mean = 0, var = 0;
  for (double y : t.target()) mean += y / static_cast<double>(t.rows());
  for (double y : t.target()) var += (y - mean) * (y - mean) / static_cast<double>(t.rows());
  CHECK(lib[0].score < 0.05 * var);
  CHECK(lib[1].score > 2 * lib[0].score);

  // Same subsample protocol, everything else recomputed here.
  auto oracle = test::golden_oracle(t, seed);
  REQUIRE(lib.size() == oracle.size());
  for (std::size_t k = 0; k < lib.size(); ++k) {
    const auto name = lib[k].name();
    REQUIRE(oracle.count(name) == 1);
    CHECK(lib[k].score == doctest::Approx(oracle[name]).epsilon(1e-9));
    if (k) {
      const double prev = oracle[lib[k - 1].name()], cur = oracle[name];
      const bool tie = std::abs(prev - cur) <= 1e-12 * std::max(1.0, std::abs(cur));
      CHECK((tie ? lib[k - 1].name() < name : prev < cur));
    }
  }

  const auto top = golden_features(t, 10, seed);
  CHECK(top.size() == 10);
  const auto appended = append_golden(t, top);
  CHECK(appended.cols() == t.cols() + 10);
  CHECK(appended.columns()[t.cols()] == "gf_A_subtract_B");
  for (const auto& d : top) {
    CHECK(d.lower <= d.upper);
    const auto v = d.apply(t);
    for (double x : v) CHECK((x >= d.lower && x <= d.upper));
  }
}

TEST_CASE("percentile") {
  CHECK(percentile({1, 2, 3, 4, 5}, 50) == 3);
  CHECK(percentile({1, 2}, 0.1) == doctest::Approx(1.001));
  CHECK(percentile({5, 1}, 100) == 5);
  CHECK_THROWS_AS(percentile({}, 50), InvalidArgument);
}

TEST_CASE("permutation selection") {
  Rng rng(12);
  FeatureTable t({"signal", "junk1", "junk2", "junk3", "junk4"});
  std::vector<double> v(5);
  for (int i = 0; i < 600; ++i) {
    for (double& x : v) x = uniform01(rng);
    t.add_row("s" + std::to_string(i), "m", "s" + std::to_string(i), v, v[0]);
  }
  const auto with_noise = add_noise_columns(t, 3);
  CHECK(with_noise.cols() == 8);
  CHECK(is_noise_column("noise_2"));
  CHECK_FALSE(is_noise_column("noise_3"));
  std::vector<std::size_t> tr, va;
  for (std::size_t r = 0; r < with_noise.rows(); ++r) (r % 5 ? tr : va).push_back(r);
  gbdt::GbdtConfig cfg;
  cfg.max_trees = 100;
  cfg.min_samples_leaf = 5;
  const auto model = gbdt::fit(with_noise.subset_rows(tr), with_noise.subset_rows(va), cfg);
  const auto res = permutation_selection(with_noise.subset_rows(va), model, 4);
  CHECK(std::find(res.retained.begin(), res.retained.end(), "signal") != res.retained.end());
  for (const auto& r : res.retained) CHECK_FALSE(is_noise_column(r));
  CHECK(res.importance.size() == 8);
  CHECK(res.importance[0].second > res.noise_threshold);

  // A model that never splits: every importance is 0, the floor keeps three.
  gbdt::GbdtModel flat;
  flat.base_prediction = 0.5;
  flat.feature_names = with_noise.columns();
  const auto fl = permutation_selection(with_noise.subset_rows(va), flat, 4);
  CHECK(fl.retained.size() == kMinRetained);
  for (const auto& [name, imp] : fl.importance) CHECK(imp == 0.0);

  gbdt::GbdtModel other = flat;
  other.feature_names.pop_back();
  CHECK_THROWS_AS(permutation_selection(with_noise.subset_rows(va), other, 4), InvalidArgument);
}
