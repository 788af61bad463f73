#include "mmf/automl/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <iostream>
#include <numeric>
#include <set>
#include <stdexcept>

#include "mmf/common/error.hpp"

namespace mmf::automl {

using features::FeatureTable;
using gbdt::GbdtConfig;
using gbdt::GrowthStrategy;

std::string_view to_string(TrainMode m) { return m == TrainMode::fast ? "fast" : "compete"; }

TrainMode parse_train_mode(std::string_view s) {
  if (s == "compete") return TrainMode::compete;
  if (s == "fast") return TrainMode::fast;
  throw InvalidArgument("unknown training mode '" + std::string(s) + "' (expected compete or fast)");
}

namespace {

constexpr GrowthStrategy kStrategies[] = {GrowthStrategy::leaf_wise, GrowthStrategy::level_wise,
                                          GrowthStrategy::oblivious};

std::string short_name(GrowthStrategy s) {
  switch (s) {
    case GrowthStrategy::leaf_wise: return "leaf";
    case GrowthStrategy::level_wise: return "level";
    case GrowthStrategy::oblivious: return "oblivious";
  }
  return "?";
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  for (const auto& s : b)
    if (std::find(a.begin(), a.end(), s) == a.end()) a.push_back(s);
  return a;
}

struct Spec {
  std::string stage;
  GbdtConfig cfg;
  std::vector<std::string> columns;
  std::optional<std::vector<double>> weights;  // per dev row
};

class Trainer {
 public:
  Trainer(FeatureTable dev, std::vector<Fold> folds, const PipelineOptions& opts)
      : dev_(std::move(dev)), folds_(std::move(folds)), opts_(opts), start_(std::chrono::steady_clock::now()) {
    std::vector<int> seen(dev_.rows(), 0);
    for (const auto& f : folds_)
      for (auto r : f.valid) ++seen[r];
    for (std::size_t r = 0; r < dev_.rows(); ++r) {
      if (seen[r] > 1) throw std::logic_error("row validated by more than one fold");
      if (seen[r] == 1) valid_index_.push_back(r);
    }
    for (auto r : valid_index_) valid_y_.push_back(dev_.target()[r]);
  }

  FeatureTable& dev() { return dev_; }
  const std::vector<Fold>& folds() const { return folds_; }
  bool kfold() const { return folds_.size() > 1; }
  const std::vector<double>& valid_targets() const { return valid_y_; }

  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }
  double remaining() const { return opts_.budget_seconds - elapsed(); }
  // Wall-clock estimate for training one more configuration on every fold.
  double model_cost() const { return models_timed_ ? fit_seconds_ / static_cast<double>(models_timed_) : 0.0; }

  std::vector<TrainedModel>& pool() { return pool_; }
  const std::vector<double>& valid_pred(std::size_t i) const { return valid_pred_[i]; }
  const std::vector<double>& oof(std::size_t i) const { return oof_[i]; }

  // Pool indices sorted by validation RMSE, ties by training order.
  std::vector<std::size_t> ranking(bool include_stacked = true) const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < pool_.size(); ++i)
      if (include_stacked || pool_[i].stage != "stacked") idx.push_back(i);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](auto a, auto b) { return pool_[a].valid_rmse < pool_[b].valid_rmse; });
    return idx;
  }

  std::vector<std::size_t> top(std::size_t n, bool include_stacked = true) const {
    auto r = ranking(include_stacked);
    if (r.size() > n) r.resize(n);
    return r;
  }

  std::vector<std::size_t> train(std::vector<Spec> specs) {
    std::vector<Spec> todo;
    for (auto& s : specs) {
      bool dup = false;
      for (const auto& m : pool_)
        dup = dup || (m.config == s.cfg && m.columns == s.columns && m.weighted == s.weights.has_value());
      for (const auto& t : todo)
        dup = dup || (t.cfg == s.cfg && t.columns == s.columns && t.weights.has_value() == s.weights.has_value());
      if (!dup) todo.push_back(std::move(s));
    }
    if (todo.empty()) return {};
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t nf = folds_.size();
    const auto jobs = static_cast<std::ptrdiff_t>(todo.size() * nf);
    std::vector<gbdt::GbdtModel> fitted(static_cast<std::size_t>(jobs));
    std::vector<std::vector<double>> preds(static_cast<std::size_t>(jobs));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(jobs));
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t j = 0; j < jobs; ++j) {
      try {
        const auto& spec = todo[static_cast<std::size_t>(j) / nf];
        const auto& fold = folds_[static_cast<std::size_t>(j) % nf];
        const auto view = dev_.select_columns(spec.columns);
        const auto tr = view.subset_rows(fold.train);
        const auto va = view.subset_rows(fold.valid);
        std::optional<std::vector<double>> w;
        if (spec.weights) {
          w.emplace();
          for (auto r : fold.train) w->push_back((*spec.weights)[r]);
        }
        fitted[j] = w ? gbdt::fit(tr, va, spec.cfg, std::span<const double>(*w)) : gbdt::fit(tr, va, spec.cfg);
        preds[j] = fitted[j].predict(va);
      } catch (...) {
        errors[j] = std::current_exception();
      }
    }
    for (const auto& e : errors)
      if (e) std::rethrow_exception(e);

    std::vector<std::size_t> added;
    for (std::size_t s = 0; s < todo.size(); ++s) {
      TrainedModel m;
      char id[64];
      std::snprintf(id, sizeof id, "%02zu_%s_%s", pool_.size() + 1, todo[s].stage.c_str(),
                    short_name(todo[s].cfg.strategy).c_str());
      m.id = id;
      m.stage = todo[s].stage;
      m.config = todo[s].cfg;
      m.columns = todo[s].columns;
      m.weighted = todo[s].weights.has_value();
      std::vector<double> full(dev_.rows(), std::nan(""));
      for (std::size_t f = 0; f < nf; ++f) {
        m.folds.push_back(std::move(fitted[s * nf + f]));
        const auto& p = preds[s * nf + f];
        for (std::size_t i = 0; i < p.size(); ++i) full[folds_[f].valid[i]] = p[i];
      }
      std::vector<double> vp;
      for (auto r : valid_index_) vp.push_back(full[r]);
      m.valid_rmse = gbdt::rmse(vp, valid_y_);
      if (opts_.verbose)
        std::cerr << "  " << m.id << "  valid rmse " << m.valid_rmse << "  (" << m.folds.front().trees.size()
                  << " trees)\n";
      pool_.push_back(std::move(m));
      valid_pred_.push_back(std::move(vp));
      oof_.push_back(std::move(full));
      added.push_back(pool_.size() - 1);
    }
    fit_seconds_ += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    models_timed_ += todo.size();
    return added;
  }

 private:
  FeatureTable dev_;
  std::vector<Fold> folds_;
  const PipelineOptions& opts_;
  std::chrono::steady_clock::time_point start_;
  std::vector<std::size_t> valid_index_;
  std::vector<double> valid_y_;
  std::vector<TrainedModel> pool_;
  std::vector<std::vector<double>> valid_pred_;
  std::vector<std::vector<double>> oof_;
  double fit_seconds_ = 0.0;
  std::size_t models_timed_ = 0;
};

void log(const PipelineOptions& o, const std::string& msg) {
  if (o.verbose) std::cerr << msg << '\n';
}

}  // namespace

EnsembleBundle train_pipeline(const FeatureTable& table, const PipelineOptions& opts, const std::string& metrics_tier,
                              const std::string& provenance) {
  if (!table.has_target()) throw InvalidArgument("training table has no target_dists column");
  if (!(opts.budget_seconds >= 1.0)) throw InvalidArgument("training budget too small for the base models");
  table.validate();
  const auto groups = distinct_groups(table);
  if (groups.size() < kMinTrainingGroups)
    throw InvalidArgument("training requires at least " + std::to_string(kMinTrainingGroups) + " groups, got " +
                          std::to_string(groups.size()));
  {
    const auto y = table.target();
    const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
    if (*lo == *hi) throw InvalidArgument("degenerate target: zero variance");
  }

  EnsembleBundle bundle;
  bundle.metrics_tier = metrics_tier;
  bundle.extractor_provenance = provenance;
  bundle.raw_features = table.columns();
  TrainingReport& rep = bundle.report;
  rep.mode = std::string(to_string(opts.mode));
  rep.seed = opts.seed;
  rep.budget_seconds = opts.budget_seconds;

  // (1) outer test split
  const Fold outer = split_test(table, opts.test_fraction, derive_seed(opts.seed, 1));
  FeatureTable dev = table.subset_rows(outer.train);
  const FeatureTable test = table.subset_rows(outer.valid);
  {
    std::set<std::string> tg;
    for (auto r : outer.valid) tg.insert(table.group_id(r));
    rep.test_groups.assign(tg.begin(), tg.end());
  }
  rep.train_rows = dev.rows();
  rep.test_rows = test.rows();
  rep.steps_run.push_back("test_split");

  ValidationPlan plan;
  plan.seed = derive_seed(opts.seed, 2);
  if (distinct_groups(dev).size() >= opts.kfold_min_groups) {
    plan.mode = ValidationPlan::Mode::kfold;
    plan.k = opts.kfold_k;
    rep.validation = "kfold-" + std::to_string(plan.k);
  } else {
    plan.mode = ValidationPlan::Mode::holdout;
    plan.train_fraction = opts.holdout_train_fraction;
    char buf[32];
    std::snprintf(buf, sizeof buf, "holdout-%g", plan.train_fraction);
    rep.validation = buf;
  }
  auto folds = split_groups(dev, plan);
  Trainer tr(std::move(dev), std::move(folds), opts);
  const auto raw = bundle.raw_features;
  log(opts, "validation: " + rep.validation);

  // (2) base models
  {
    std::vector<Spec> specs;
    std::uint64_t i = 0;
    for (auto s : kStrategies) {
      auto cfg = default_config(s);
      cfg.seed = derive_seed(opts.seed, 100 + i++);
      specs.push_back({"base", cfg, raw, std::nullopt});
    }
    tr.train(std::move(specs));
    rep.steps_run.push_back("base");
  }

  const bool compete = opts.mode == TrainMode::compete;
  auto run_step = [&](const std::string& name, std::size_t models) {
    if (tr.elapsed() + static_cast<double>(models) * tr.model_cost() <= opts.budget_seconds) {
      log(opts, "step " + name);
      rep.steps_run.push_back(name);
      return true;
    }
    log(opts, "step " + name + " skipped (budget)");
    rep.steps_skipped.push_back(name);
    return false;
  };

  if (compete) {
    // (3) random search, interleaved across strategies so a budget cut keeps
    // the strategies balanced
    Rng rng(derive_seed(opts.seed, 3));
    std::vector<std::vector<GbdtConfig>> sampled(std::size(kStrategies));
    for (std::size_t s = 0; s < std::size(kStrategies); ++s)
      for (int k = 0; k < opts.random_models_per_strategy; ++k)
        sampled[s].push_back(opts.space.sample(kStrategies[s], rng));
    std::vector<Spec> specs;
    for (int k = 0; k < opts.random_models_per_strategy; ++k)
      for (std::size_t s = 0; s < std::size(kStrategies); ++s) specs.push_back({"random", sampled[s][k], raw, {}});
    const double cost = tr.model_cost();
    std::size_t allowed = specs.size();
    if (cost > 0.0)
      allowed = std::min(allowed, static_cast<std::size_t>(std::max(0.0, 0.4 * tr.remaining()) / cost));
    if (allowed < specs.size()) {
      specs.resize(allowed);
      log(opts, "random search cut to " + std::to_string(allowed) + " models (budget)");
    }
    if (!specs.empty()) {
      log(opts, "step random_search");
      rep.steps_run.push_back("random_search");
      tr.train(std::move(specs));
    } else {
      rep.steps_skipped.push_back("random_search");
    }

    const std::size_t ntop = opts.top_models_to_improve;
    auto retrain_top = [&](const std::string& stage, const std::vector<std::string>& extra,
                           const std::vector<std::string>* replace) {
      std::vector<Spec> specs2;
      for (auto i : tr.top(ntop)) {
        const auto& m = tr.pool()[i];
        specs2.push_back({stage, m.config, replace ? *replace : concat(m.columns, extra), std::nullopt});
      }
      tr.train(std::move(specs2));
    };

    // (4) K-Means centres
    if (run_step("kmeans", ntop)) {
      const FeatureTable base = tr.dev().select_columns(raw);
      auto [augmented, km] = features::kmeans_augment(base, features::default_kmeans_k(base.rows()),
                                                      derive_seed(opts.seed, 4));
      std::vector<std::string> cols;
      for (std::size_t c = base.cols(); c < augmented.cols(); ++c) {
        cols.push_back(augmented.columns()[c]);
        tr.dev().add_column(augmented.columns()[c], std::vector<double>(augmented.column(c).begin(), augmented.column(c).end()));
      }
      bundle.kmeans = std::move(km);
      retrain_top("kmeans", cols, nullptr);
    }

    // (5) Golden Features
    if (run_step("golden_features", ntop)) {
      const FeatureTable base = tr.dev().select_columns(raw);
      bundle.golden = features::golden_features(base, opts.golden_top_n, derive_seed(opts.seed, 5));
      std::vector<std::string> cols;
      for (const auto& d : bundle.golden) {
        cols.push_back(d.name());
        tr.dev().add_column(d.name(), d.apply(base));
      }
      retrain_top("golden", cols, nullptr);
    }

    // (6) permutation feature selection
    if (run_step("feature_selection", ntop + 1)) {
      const auto& best = tr.pool()[tr.top(1).front()];
      const FeatureTable noisy =
          features::add_noise_columns(tr.dev().select_columns(best.columns), derive_seed(opts.seed, 6));
      const auto& fold = tr.folds().front();
      const auto probe = gbdt::fit(noisy.subset_rows(fold.train), noisy.subset_rows(fold.valid), best.config);
      auto sel = features::permutation_selection(noisy.subset_rows(fold.valid), probe, derive_seed(opts.seed, 7));
      bundle.selected_features = sel.retained;
      retrain_top("selected", {}, &bundle.selected_features);
    }

    // Budget plan for the improvement steps: drop stacking first, then
    // boost-on-errors, then the second hill-climb round.
    const std::size_t per_round = ntop * 12;
    const std::size_t stack_models = tr.kfold() ? std::size(kStrategies) : 0;
    bool do_stack = tr.kfold(), do_boost = true;
    int rounds = kHillClimbRounds;
    auto projected = [&] {
      return tr.elapsed() + tr.model_cost() * static_cast<double>(static_cast<std::size_t>(rounds) * per_round +
                                                                  (do_boost ? 1 : 0) + (do_stack ? stack_models : 0));
    };
    if (!tr.kfold()) rep.steps_skipped.push_back("stacking");
    if (do_stack && projected() > opts.budget_seconds) {
      do_stack = false;
      rep.steps_skipped.push_back("stacking");
    }
    if (projected() > opts.budget_seconds) do_boost = false;
    while (rounds > 0 && projected() > opts.budget_seconds) --rounds;

    // (7) hill climbing
    for (int round = 1; round <= kHillClimbRounds; ++round) {
      const std::string name = "hill_climb_" + std::to_string(round);
      if (round > rounds) {
        rep.steps_skipped.push_back(name);
        continue;
      }
      log(opts, "step " + name);
      rep.steps_run.push_back(name);
      std::vector<Spec> specs2;
      for (auto i : tr.top(ntop)) {
        const auto m = tr.pool()[i];
        for (auto& c : hill_climb_neighbors(m.config)) specs2.push_back({"hill_climb", c, m.columns, std::nullopt});
      }
      tr.train(std::move(specs2));
    }

    // (8) boost on errors
    if (do_boost) {
      log(opts, "step boost_on_errors");
      rep.steps_run.push_back("boost_on_errors");
      const auto bi = tr.top(1).front();
      const auto best = tr.pool()[bi];
      const auto y = tr.dev().target();
      const std::vector<double> pred = tr.kfold() ? tr.oof(bi) : best.predict(tr.dev());
      std::vector<double> res(y.size());
      double mean_abs = 0.0;
      for (std::size_t r = 0; r < y.size(); ++r) {
        res[r] = std::abs(y[r] - pred[r]);
        mean_abs += res[r];
      }
      mean_abs /= static_cast<double>(y.size());
      std::vector<double> w(y.size(), 1.0);
      if (mean_abs > 0.0)
        for (std::size_t r = 0; r < y.size(); ++r) w[r] = 1.0 + res[r] / mean_abs;
      tr.train({Spec{"boost", best.config, best.columns, std::move(w)}});
    } else {
      rep.steps_skipped.push_back("boost_on_errors");
    }

    // (9) stacking on out-of-fold predictions
    if (do_stack) {
      log(opts, "step stacking");
      rep.steps_run.push_back("stacking");
      const auto inputs = tr.top(opts.stacking_inputs, false);
      std::vector<std::string> cols;
      for (auto i : inputs) {
        const auto& m = tr.pool()[i];
        const auto& o = tr.oof(i);
        for (double v : o)
          if (std::isnan(v)) throw std::logic_error("stacking input without out-of-fold prediction");
        bundle.stack_inputs.push_back(m.id);
        cols.push_back(stack_column(m.id));
        tr.dev().add_column(stack_column(m.id), o);
      }
      std::vector<Spec> specs2;
      for (auto s : kStrategies) {
        for (auto i : tr.ranking(false)) {
          const auto& m = tr.pool()[i];
          if (m.config.strategy != s) continue;
          specs2.push_back({"stacked", m.config, concat(m.columns, cols), std::nullopt});
          break;
        }
      }
      tr.train(std::move(specs2));
    }
  } else {
    for (const char* s : {"random_search", "kmeans", "golden_features", "feature_selection", "hill_climb_1",
                          "hill_climb_2", "boost_on_errors", "stacking"})
      rep.steps_skipped.push_back(s);
  }

  // (10) greedy ensemble
  log(opts, "step ensemble");
  rep.steps_run.push_back("ensemble");
  auto& pool = tr.pool();
  std::vector<std::vector<double>> vp;
  for (std::size_t i = 0; i < pool.size(); ++i) vp.push_back(tr.valid_pred(i));
  const auto counts = greedy_ensemble(vp, tr.valid_targets(), derive_seed(opts.seed, 10));
  rep.ensemble_valid_rmse = gbdt::rmse(weighted_mean(vp, counts), tr.valid_targets());
  for (const auto& m : pool) rep.models.push_back({m.id, m.stage, m.valid_rmse});

  bool needs_stack = false;
  for (std::size_t i = 0; i < pool.size(); ++i)
    if (counts[i] > 0) {
      bundle.members.push_back({pool[i].id, counts[i]});
      needs_stack = needs_stack || pool[i].stage == "stacked";
    }
  if (!needs_stack) bundle.stack_inputs.clear();
  std::set<std::string> keep(bundle.stack_inputs.begin(), bundle.stack_inputs.end());
  for (const auto& m : bundle.members) keep.insert(m.model_id);
  for (auto& m : pool)
    if (keep.count(m.id)) bundle.models.push_back(std::move(m));

  // (11) held-out evaluation
  rep.steps_run.push_back("evaluate");
  const auto test_pred = predict_bundle(bundle, test);
  rep.test_mae = mean_absolute_error(test_pred, test.target());
  rep.test_r2 = r2_score(test_pred, test.target());
  rep.test_rmse = gbdt::rmse(test_pred, test.target());
  rep.table_mae = mean_absolute_error(predict_bundle(bundle, table), table.target());
  log(opts, "test mae " + std::to_string(rep.test_mae) + "  r2 " + std::to_string(rep.test_r2) + "  elapsed " +
                std::to_string(tr.elapsed()) + " s");
  return bundle;
}

}  // namespace mmf::automl
