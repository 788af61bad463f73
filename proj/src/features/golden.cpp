#include <algorithm>
#include <cmath>
#include <numeric>

#include "mmf/common/error.hpp"
#include "mmf/common/random.hpp"
#include "mmf/features/features.hpp"

namespace mmf::features {

std::string_view to_string(GoldenOp op) {
  switch (op) {
    case GoldenOp::subtract: return "subtract";
    case GoldenOp::add: return "add";
    case GoldenOp::multiply: return "multiply";
    case GoldenOp::ratio: return "ratio";
  }
  return "?";
}

GoldenOp parse_golden_op(std::string_view s) {
  if (s == "subtract") return GoldenOp::subtract;
  if (s == "add") return GoldenOp::add;
  if (s == "multiply") return GoldenOp::multiply;
  if (s == "ratio") return GoldenOp::ratio;
  throw InvalidArgument("unknown golden feature op '" + std::string(s) + "'");
}

double golden_combine(GoldenOp op, double a, double b) {
  double v = 0.0;
  switch (op) {
    case GoldenOp::subtract: v = a - b; break;
    case GoldenOp::add: v = a + b; break;
    case GoldenOp::multiply: v = a * b; break;
    case GoldenOp::ratio: {
      const double den = std::abs(b) < kGoldenRatioEps ? std::copysign(kGoldenRatioEps, b) : b;
      v = a / den;
      break;
    }
  }
  if (std::isnan(v)) return 0.0;
  return std::clamp(v, -kGoldenClamp, kGoldenClamp);
}

std::string GoldenFeatureDef::name() const {
  return "gf_" + left + "_" + std::string(to_string(op)) + "_" + right;
}

std::vector<double> GoldenFeatureDef::raw(const FeatureTable& table) const {
  const auto a = table.column(left);
  const auto b = table.column(right);
  std::vector<double> out(table.rows());
  for (std::size_t r = 0; r < out.size(); ++r) out[r] = golden_combine(op, a[r], b[r]);
  return out;
}

std::vector<double> GoldenFeatureDef::apply(const FeatureTable& table) const {
  auto v = raw(table);
  for (double& x : v) x = std::clamp(x, lower, upper);
  return v;
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw InvalidArgument("percentile of empty set");
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(p, 0.0, 100.0) / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

std::vector<GoldenFeatureDef> golden_candidates(const FeatureTable& table, std::uint64_t seed) {
  if (!table.has_target()) throw InvalidArgument("golden features: table has no target");
  const std::size_t n = table.rows();
  if (n < 4) throw InvalidArgument("golden features: fewer than 4 usable rows");

  std::vector<GoldenFeatureDef> cands;
  const auto& cols = table.columns();
  for (std::size_t i = 0; i < cols.size(); ++i)
    for (std::size_t j = i + 1; j < cols.size(); ++j) {
      cands.push_back({cols[i], cols[j], GoldenOp::subtract});
      cands.push_back({cols[i], cols[j], GoldenOp::add});
      cands.push_back({cols[i], cols[j], GoldenOp::multiply});
      cands.push_back({cols[i], cols[j], GoldenOp::ratio});
      cands.push_back({cols[j], cols[i], GoldenOp::ratio});
    }

  Rng rng(seed);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  shuffle(idx, rng);
  idx.resize(std::min(n, kGoldenSubsample));
  const std::size_t half = idx.size() / 2;
  const std::span<const std::size_t> train_idx(idx.data(), half);
  const std::span<const std::size_t> test_idx(idx.data() + half, idx.size() - half);
  const auto y = table.target();

  const auto nc = static_cast<std::ptrdiff_t>(cands.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t c = 0; c < nc; ++c) {
    auto& def = cands[c];
    const auto a = table.column(def.left);
    const auto b = table.column(def.right);
    FeatureTable tr({"x"}), te({"x"});
    for (auto r : train_idx) {
      const double v = golden_combine(def.op, a[r], b[r]);
      tr.add_row({}, {}, {}, std::span<const double>(&v, 1), y[r]);
    }
    for (auto r : test_idx) {
      const double v = golden_combine(def.op, a[r], b[r]);
      te.add_row({}, {}, {}, std::span<const double>(&v, 1), y[r]);
    }
    const auto tree = gbdt::single_tree_fit(tr, kGoldenDepth, kGoldenMinLeaf);
    const auto pred = gbdt::predict_tree(tree, te);
    double mse = 0.0;
    for (std::size_t r = 0; r < pred.size(); ++r) mse += (pred[r] - te.target()[r]) * (pred[r] - te.target()[r]);
    def.score = mse / static_cast<double>(pred.size());
  }
  return cands;
}

std::vector<GoldenFeatureDef> golden_features(const FeatureTable& table, std::size_t top_n, std::uint64_t seed) {
  auto cands = golden_candidates(table, seed);
  std::stable_sort(cands.begin(), cands.end(), [](const GoldenFeatureDef& a, const GoldenFeatureDef& b) {
    if (a.score != b.score) return a.score < b.score;
    return a.name() < b.name();
  });
  if (cands.size() > top_n) cands.resize(top_n);
  for (auto& def : cands) {
    const auto v = def.raw(table);
    def.lower = percentile(v, 0.1);
    def.upper = percentile(v, 99.9);
  }
  return cands;
}

FeatureTable append_golden(const FeatureTable& table, const std::vector<GoldenFeatureDef>& defs) {
  FeatureTable out = table;
  for (const auto& d : defs) out.add_column(d.name(), d.apply(table));
  return out;
}

}  // namespace mmf::features
