#include <omp.h>

#include <cmath>
#include <numeric>
#include <set>

#include <doctest.h>

#include "mmf/common/error.hpp"
#include "mmf/gbdt/binning.hpp"
#include "mmf/gbdt/gbdt.hpp"
#include "mmf/gbdt/model_io.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace mmf;
using namespace mmf::gbdt;
using features::FeatureTable;

namespace {

FeatureTable make_table(const std::vector<std::vector<double>>& cols, const std::vector<double>& y) {
  std::vector<std::string> names;
  for (std::size_t c = 0; c < cols.size(); ++c) names.push_back("x" + std::to_string(c));
  FeatureTable t(names);
  std::vector<double> row(cols.size());
  for (std::size_t r = 0; r < y.size(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) row[c] = cols[c][r];
    t.add_row("s" + std::to_string(r), "m", "g" + std::to_string(r % 7), row, y[r]);
  }
  return t;
}

FeatureTable regression_table(std::size_t rows, std::size_t feats, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<double>> cols(feats, std::vector<double>(rows));
  std::vector<double> y(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    for (auto& c : cols) c[r] = uniform01(rng);
    y[r] = std::sin(4 * cols[0][r]) + cols[1 % feats][r] * cols[feats - 1][r] + 0.1 * normal(rng);
  }
  return make_table(cols, y);
}

const FeatureTable kEmpty;

double mse_of(const std::vector<double>& p, std::span<const double> y) {
  double s = 0;
  for (std::size_t i = 0; i < p.size(); ++i) s += (p[i] - y[i]) * (p[i] - y[i]);
  return s / static_cast<double>(p.size());
}

}  // namespace

TEST_CASE("binning") {
  std::vector<double> v = {3, 1, 2, 2, 5, 1};
  const auto b = make_bins(v);
  CHECK(b.count() == 4);
  CHECK(b.bin_of(1) == 0);
  CHECK(b.bin_of(2) == 1);
  CHECK(b.bin_of(5) == 3);
  CHECK(b.threshold_after(0) == 1.5);
  CHECK(b.threshold_after(2) == 4.0);

  Rng rng(1);
  std::vector<double> many(5000);
  for (double& x : many) x = normal(rng);
  const auto mb = make_bins(many);
  CHECK(mb.count() <= kMaxBins);
  CHECK(mb.count() > 200);
  for (int i = 0; i + 1 < mb.count(); ++i) {
    CHECK(mb.upper[i] < mb.lower[i + 1]);
    const double t = mb.threshold_after(i);
    CHECK(t >= mb.upper[i]);
    CHECK(t < mb.lower[i + 1]);
  }
  for (double x : many) {
    const int bin = mb.bin_of(x);
    CHECK(x >= mb.lower[bin]);
    CHECK(x <= mb.upper[bin]);
  }
}

TEST_CASE("parallel histogram equals the serial reference") {
  const auto t = regression_table(3000, 6, 2);
  const auto m = bin_table(t);
  Rng rng(3);
  std::vector<double> g(t.rows()), h(t.rows());
  for (std::size_t i = 0; i < g.size(); ++i) {
    g[i] = normal(rng);
    h[i] = uniform(rng, 0.5, 2.0);
  }
  std::vector<std::uint32_t> rows;
  for (std::uint32_t r = 0; r < t.rows(); r += 3) rows.push_back(r);
  std::vector<int> feats = {0, 2, 3, 5};
  Histogram a, b;
  build_histogram(m, rows, g, h, feats, a);
  reference::build_histogram(m, rows, g, h, feats, b);
  REQUIRE(a.size() == b.size());
  for (int f : feats)
    for (int k = 0; k < kMaxBins; ++k) {
      const auto i = static_cast<std::size_t>(f) * kMaxBins + k;
      CHECK(a[i].g == b[i].g);
      CHECK(a[i].h == b[i].h);
      CHECK(a[i].n == b[i].n);
    }
}

TEST_CASE("constant target gives a zero-tree model") {
  auto t = regression_table(100, 3, 4);
  t.set_target(std::vector<double>(100, 0.7));
  const auto m = fit(t, kEmpty, GbdtConfig{});
  CHECK(m.base_prediction == 0.7);
  CHECK(m.trees.empty());
  for (double p : m.predict(t)) CHECK(p == 0.7);
}

TEST_CASE("step function with one depth-1 tree") {
  Rng rng(5);
  std::vector<double> x(200), y(200);
  for (std::size_t i = 0; i < 200; ++i) {
    x[i] = uniform01(rng);
    y[i] = x[i] > 0.5 ? 1.0 : 0.0;
  }
  GbdtConfig cfg;
  cfg.max_depth = 1;
  cfg.learning_rate = 1.0;
  cfg.max_trees = 1;
  cfg.min_samples_leaf = 1;
  const auto t = make_table({x}, y);
  const auto m = fit(t, kEmpty, cfg);
  REQUIRE(m.trees.size() == 1);
  const auto& root = m.trees[0].nodes[0];
  CHECK(root.feature == 0);
  // Every value has its own bin here, so "one bin" is the gap between the
  // nearest samples on either side of 0.5.
  double below = 0, above = 1;
  for (double v : x) (v <= 0.5 ? below : above) = v <= 0.5 ? std::max(below, v) : std::min(above, v);
  CHECK(root.threshold >= below);
  CHECK(root.threshold < above);
  CHECK(mse_of(m.predict(t), t.target()) < 1e-20);
}

TEST_CASE("first split picks the informative feature") {
  Rng rng(6);
  std::vector<double> x1(500), x2(500), y(500);
  for (std::size_t i = 0; i < 500; ++i) {
    x1[i] = uniform01(rng);
    x2[i] = uniform01(rng);
    y[i] = x1[i] + 0.05 * normal(rng);
  }
  GbdtConfig cfg;
  cfg.max_trees = 5;
  const auto m = fit(make_table({x1, x2}, y), kEmpty, cfg);
  REQUIRE(!m.trees.empty());
  CHECK(m.trees[0].nodes[0].feature == 0);
}

TEST_CASE("predict traces") {
  GbdtModel zero;
  zero.base_prediction = 0.3;
  zero.feature_names = {"x0"};
  const auto t = make_table({{0.1, 0.9}}, {0, 0});
  for (double p : zero.predict(t)) CHECK(p == 0.3);

  GbdtModel one = zero;
  one.config.learning_rate = 0.5;
  Tree tree;
  tree.nodes = {{0, 0.5, 1, 2, 0}, {-1, 0, -1, -1, -2.0}, {-1, 0, -1, -1, 4.0}};
  one.trees.push_back(tree);
  const auto p = one.predict(t);
  CHECK(p[0] == doctest::Approx(0.3 + 0.5 * -2.0));
  CHECK(p[1] == doctest::Approx(0.3 + 0.5 * 4.0));
  CHECK(tree.leaf_count() == 2);
  CHECK(tree.depth() == 1);

  CHECK_THROWS_AS(one.predict(make_table({{0.1}, {0.2}}, {0}).select_columns({"x1"})), InvalidArgument);
}

TEST_CASE("overfit capacity on 50 unique rows") {
  const auto t = regression_table(50, 3, 7);
  GbdtConfig cfg;
  cfg.max_depth = 8;
  cfg.max_trees = 500;
  cfg.min_samples_leaf = 1;
  cfg.l2_reg = 0;
  cfg.early_stopping_rounds = 1000;
  const auto m = fit(t, kEmpty, cfg);
  CHECK(std::sqrt(mse_of(m.predict(t), t.target())) < 1e-3);
}

TEST_CASE("depth-2 trees match a brute-force split search") {
  for (int d = 0; d < 20; ++d) {
    Rng rng(derive_seed(1000, d));
    const auto rows = static_cast<std::size_t>(uniform_int(rng, 10, 200));
    const auto feats = static_cast<std::size_t>(uniform_int(rng, 1, 5));
    std::vector<std::vector<double>> x(feats, std::vector<double>(rows));
    std::vector<double> y(rows);
    for (auto& col : x) {
      const auto distinct = uniform_int(rng, 2, 32);
      for (double& v : col) v = static_cast<double>(uniform_int(rng, 0, distinct - 1)) / 7.0;
    }
    for (std::size_t r = 0; r < rows; ++r) y[r] = x[0][r] * x[feats - 1][r] + normal(rng);
    GbdtConfig cfg;
    cfg.strategy = GrowthStrategy::level_wise;
    cfg.max_depth = 2;
    cfg.max_trees = 1;
    cfg.learning_rate = 1.0;
    cfg.min_samples_leaf = 1;
    const auto t = make_table(x, y);
    const auto m = fit(t, kEmpty, cfg);
    CHECK(mse_of(m.predict(t), t.target()) == doctest::Approx(test::brute_force_depth2_mse(x, y)).epsilon(1e-9));
  }
}

TEST_CASE("training loss is monotone for every strategy") {
  const auto t = regression_table(400, 5, 8);
  for (auto s : {GrowthStrategy::leaf_wise, GrowthStrategy::level_wise, GrowthStrategy::oblivious}) {
    GbdtConfig cfg;
    cfg.strategy = s;
    cfg.max_trees = 80;
    cfg.min_samples_leaf = 3;
    cfg.l2_reg = 0.5;
    const auto m = fit(t, kEmpty, cfg);
    REQUIRE(m.train_history.size() >= 2);
    for (std::size_t i = 1; i < m.train_history.size(); ++i)
      CHECK(m.train_history[i].train_rmse <= m.train_history[i - 1].train_rmse + 1e-12);
    // Prediction bound: base-centred outputs cannot run far past the target range.
    const auto p = m.predict(t);
    const auto y = t.target();
    const double lo = *std::min_element(y.begin(), y.end()), hi = *std::max_element(y.begin(), y.end());
    const double margin = m.config.learning_rate * m.max_abs_leaf();
    for (double v : p) {
      CHECK(v >= lo - margin);
      CHECK(v <= hi + margin);
    }
    if (s == GrowthStrategy::leaf_wise)
      for (const auto& tr : m.trees) CHECK(tr.leaf_count() <= static_cast<std::size_t>(cfg.max_leaves));
    else
      for (const auto& tr : m.trees) CHECK(tr.depth() <= static_cast<std::size_t>(cfg.max_depth));
    if (s == GrowthStrategy::oblivious)
      for (const auto& tr : m.trees) {
        // One split per level: all internal nodes at a depth share feature and threshold.
        std::vector<std::pair<int, int>> frontier = {{0, 0}};
        std::vector<std::set<std::pair<int, double>>> per_level(8);
        while (!frontier.empty()) {
          auto [node, depth] = frontier.back();
          frontier.pop_back();
          const auto& n = tr.nodes[node];
          if (n.is_leaf()) continue;
          per_level[depth].insert({n.feature, n.threshold});
          frontier.push_back({n.left, depth + 1});
          frontier.push_back({n.right, depth + 1});
        }
        for (const auto& lvl : per_level) CHECK(lvl.size() <= 1);
      }
  }
}

TEST_CASE("early stopping and subsampling") {
  const auto tr = regression_table(300, 4, 9);
  const auto va = regression_table(100, 4, 10);
  GbdtConfig cfg;
  cfg.max_trees = 1000;
  cfg.early_stopping_rounds = 10;
  cfg.subsample_rows = 0.7;
  cfg.subsample_cols = 0.6;
  cfg.min_samples_leaf = 5;
  const auto m = fit(tr, va, cfg);
  CHECK(m.trees.size() < 1000);
  CHECK(m.train_history.size() >= m.trees.size());
  // The kept trees are the best-validation prefix.
  double best = 1e300;
  std::size_t arg = 0;
  for (std::size_t i = 0; i < m.train_history.size(); ++i)
    if (*m.train_history[i].valid_rmse < best) {
      best = *m.train_history[i].valid_rmse;
      arg = i;
    }
  CHECK(m.trees.size() == arg + 1);
  CHECK(rmse(m.predict(va), va.target()) == doctest::Approx(best).epsilon(1e-12));
  CHECK(fit(tr, va, cfg) == m);
}

TEST_CASE("fit is independent of the thread count") {
  const auto tr = regression_table(800, 6, 11);
  const auto va = regression_table(200, 6, 12);
  for (auto s : {GrowthStrategy::leaf_wise, GrowthStrategy::level_wise, GrowthStrategy::oblivious}) {
    GbdtConfig cfg;
    cfg.strategy = s;
    cfg.max_trees = 60;
    cfg.subsample_rows = 0.8;
    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    const auto a = fit(tr, va, cfg);
    omp_set_num_threads(4);
    const auto b = fit(tr, va, cfg);
    omp_set_num_threads(saved);
    CHECK(a == b);
  }
}

TEST_CASE("weights") {
  const auto t = regression_table(100, 2, 13);
  std::vector<double> w(100, 1.0);
  GbdtConfig cfg;
  cfg.max_trees = 10;
  CHECK(fit(t, kEmpty, cfg, w) == fit(t, kEmpty, cfg));
  w[3] = 0.0;
  CHECK_THROWS_AS(fit(t, kEmpty, cfg, w), InvalidArgument);
  w.pop_back();
  CHECK_THROWS_AS(fit(t, kEmpty, cfg, w), InvalidArgument);
}

TEST_CASE("config validation and errors") {
  GbdtConfig cfg;
  cfg.learning_rate = 0;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg = {};
  cfg.subsample_cols = 1.5;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg = {};
  cfg.l2_reg = -1;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  CHECK_THROWS_AS(fit(FeatureTable({"a"}), kEmpty, GbdtConfig{}), InvalidArgument);
  CHECK(parse_strategy("oblivious") == GrowthStrategy::oblivious);
  CHECK_THROWS_AS(parse_strategy("random"), InvalidArgument);
}

TEST_CASE("single_tree_fit") {
  const auto sep = make_table({{-1, -1, 1, 1}}, {0, 0, 1, 1});
  const auto t1 = single_tree_fit(sep, 3, 1);
  REQUIRE(!t1.nodes[0].is_leaf());
  CHECK(t1.nodes[0].threshold > -1);
  CHECK(t1.nodes[0].threshold < 1);
  const auto p1 = predict_tree(t1, sep);
  CHECK(p1 == std::vector<double>{0, 0, 1, 1});

  // Linear target on evenly spaced points: every greedy split halves its node.
  const auto eight = make_table({{3, 1, 4, 8, 5, 7, 2, 6}}, {3, 1, 4, 8, 5, 7, 2, 6});
  const auto t8 = single_tree_fit(eight, 3, 1);
  CHECK(t8.leaf_count() <= 8);
  CHECK(mse_of(predict_tree(t8, eight), eight.target()) == 0.0);

  const auto stump = single_tree_fit(eight, 3, 8);
  CHECK(stump.nodes.size() == 1);
  CHECK(stump.nodes[0].value == doctest::Approx(4.5));
  CHECK_THROWS_AS(single_tree_fit(FeatureTable({"a"}), 3, 1), InvalidArgument);
}

TEST_CASE("model json round trip") {
  const auto t = regression_table(200, 3, 14);
  GbdtConfig cfg;
  cfg.strategy = GrowthStrategy::leaf_wise;
  cfg.max_trees = 20;
  const auto m = fit(t, regression_table(50, 3, 15), cfg);
  test::TempDir dir("gbdt");
  save_model(m, dir / "m.json");
  const auto back = load_model(dir / "m.json");
  CHECK(back == m);
  CHECK(back.predict(t) == m.predict(t));

  const auto j = tree_to_json(m.trees[0], m.feature_names);
  CHECK(j.contains("feature"));
  CHECK(j["feature"].is_string());
  CHECK(j.contains("threshold"));
  CHECK(j.contains("left"));
  CHECK(config_from_json(config_to_json(cfg)) == cfg);
  nlohmann::json bad = j;
  bad["feature"] = "nope";
  CHECK_THROWS_AS(tree_from_json(bad, m.feature_names), InvalidArgument);
}
