#pragma once

// Brute-force reference implementations shared by unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "mmf/common/random.hpp"
#include "mmf/features/table.hpp"

namespace mmf::test {

// Greedy depth-2 regression by exhaustive threshold enumeration on raw
// values. Ties: lowest feature, then lowest threshold.
inline double brute_force_depth2_mse(const std::vector<std::vector<double>>& x, const std::vector<double>& y) {
  auto sse = [&](const std::vector<std::size_t>& rows) {
    double m = 0;
    for (auto r : rows) m += y[r];
    m /= static_cast<double>(rows.size());
    double s = 0;
    for (auto r : rows) s += (y[r] - m) * (y[r] - m);
    return s;
  };
  auto best_split = [&](const std::vector<std::size_t>& rows) -> std::pair<std::vector<std::size_t>, std::vector<std::size_t>> {
    const double parent = sse(rows);
    double best = 1e-12;
    std::pair<std::vector<std::size_t>, std::vector<std::size_t>> out;
    for (std::size_t f = 0; f < x.size(); ++f) {
      std::set<double> vals;
      for (auto r : rows) vals.insert(x[f][r]);
      for (double v : vals) {
        std::vector<std::size_t> l, rr;
        for (auto r : rows) (x[f][r] <= v ? l : rr).push_back(r);
        if (l.empty() || rr.empty()) continue;
        const double gain = parent - sse(l) - sse(rr);
        if (gain > best * (1 + 1e-12) + 1e-15) {
          best = gain;
          out = {l, rr};
        }
      }
    }
    return out;
  };
  std::vector<std::size_t> all(y.size());
  std::iota(all.begin(), all.end(), 0);
  std::vector<std::vector<std::size_t>> leaves;
  auto root = best_split(all);
  if (root.first.empty()) return sse(all) / static_cast<double>(y.size());
  for (auto* child : {&root.first, &root.second}) {
    auto s = best_split(*child);
    if (s.first.empty()) {
      leaves.push_back(*child);
    } else {
      leaves.push_back(s.first);
      leaves.push_back(s.second);
    }
  }
  double total = 0;
  for (const auto& l : leaves) total += sse(l);
  return total / static_cast<double>(y.size());
}

// Columns A..J; target = A - B.
inline features::FeatureTable planted_golden_table(std::size_t rows, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::string> names;
  for (char c = 'A'; c <= 'J'; ++c) names.emplace_back(1, c);
  features::FeatureTable t(names);
  std::vector<double> v(names.size());
  for (std::size_t r = 0; r < rows; ++r) {
    for (double& x : v) x = uniform(rng, 0.1, 2.0);
    t.add_row("s" + std::to_string(r), "m", "s" + std::to_string(r), v, v[0] - v[1]);
  }
  return t;
}

inline double combine(const std::string& op, double a, double b) {
  double v;
  if (op == "subtract") v = a - b;
  else if (op == "add") v = a + b;
  else if (op == "multiply") v = a * b;
  else v = a / (std::abs(b) < 1e-10 ? std::copysign(1e-10, b) : b);
  return std::clamp(v, -1e15, 1e15);
}

// Exact greedy regression tree on one feature, by direct enumeration of
// midpoints; returns test-set MSE.
inline double probe_mse(const std::vector<double>& xtr, const std::vector<double>& ytr, const std::vector<double>& xte,
                 const std::vector<double>& yte, int depth, std::size_t min_leaf) {
  struct Leaf {
    std::vector<std::size_t> rows;
    double lo, hi;  // x in (lo, hi]
  };
  std::vector<Leaf> frontier{{{}, -INFINITY, INFINITY}};
  for (std::size_t i = 0; i < xtr.size(); ++i) frontier[0].rows.push_back(i);
  std::vector<Leaf> done;
  auto sse = [&](const std::vector<std::size_t>& rows) {
    double m = 0;
    for (auto r : rows) m += ytr[r];
    m /= static_cast<double>(rows.size());
    double s = 0;
    for (auto r : rows) s += (ytr[r] - m) * (ytr[r] - m);
    return s;
  };
  for (int d = 0; d < depth; ++d) {
    std::vector<Leaf> next;
    for (auto& leaf : frontier) {
      std::set<double> xs;
      for (auto r : leaf.rows) xs.insert(xtr[r]);
      const double parent = sse(leaf.rows);
      double best_gain = 1e-12;
      double best_thr = NAN;
      for (auto it = xs.begin(); std::next(it) != xs.end(); ++it) {
        const double thr = *it + (*std::next(it) - *it) / 2;
        std::vector<std::size_t> l, r;
        for (auto row : leaf.rows) (xtr[row] <= thr ? l : r).push_back(row);
        if (l.size() < min_leaf || r.size() < min_leaf) continue;
        const double gain = parent - sse(l) - sse(r);
        if (gain > best_gain * (1 + 1e-9)) {
          best_gain = gain;
          best_thr = thr;
        }
      }
      if (std::isnan(best_thr)) {
        done.push_back(leaf);
        continue;
      }
      Leaf l{{}, leaf.lo, best_thr}, r{{}, best_thr, leaf.hi};
      for (auto row : leaf.rows) (xtr[row] <= best_thr ? l : r).rows.push_back(row);
      next.push_back(l);
      next.push_back(r);
    }
    frontier = next;
  }
  for (auto& l : frontier) done.push_back(l);
  double mse = 0;
  for (std::size_t i = 0; i < xte.size(); ++i)
    for (const auto& leaf : done)
      if (xte[i] > leaf.lo && xte[i] <= leaf.hi) {
        double m = 0;
        for (auto r : leaf.rows) m += ytr[r];
        m /= static_cast<double>(leaf.rows.size());
        mse += (yte[i] - m) * (yte[i] - m);
      }
  return mse / static_cast<double>(xte.size());
}

// Probe-tree test MSE of every candidate, keyed by derived column name, using
// the same half/half shuffled split as the library.
inline std::map<std::string, double> golden_oracle(const features::FeatureTable& t, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::size_t> idx(t.rows());
  std::iota(idx.begin(), idx.end(), 0);
  shuffle(idx, rng);
  const std::size_t half = idx.size() / 2;
  std::map<std::string, double> oracle;
  const auto& cols = t.columns();
  for (std::size_t i = 0; i < cols.size(); ++i)
    for (std::size_t j = i + 1; j < cols.size(); ++j)
      for (auto [l, r, op] : std::vector<std::tuple<std::size_t, std::size_t, std::string>>{
               {i, j, "subtract"}, {i, j, "add"}, {i, j, "multiply"}, {i, j, "ratio"}, {j, i, "ratio"}}) {
        std::vector<double> xtr, ytr, xte, yte;
        for (std::size_t k = 0; k < idx.size(); ++k) {
          const double x = combine(op, t.value(idx[k], l), t.value(idx[k], r));
          (k < half ? xtr : xte).push_back(x);
          (k < half ? ytr : yte).push_back(t.target()[idx[k]]);
        }
        oracle["gf_" + cols[l] + "_" + op + "_" + cols[r]] = probe_mse(xtr, ytr, xte, yte, 3, 5);
      }
  return oracle;
}

// Names ordered by ascending score; scores within 1e-12 relative tie and
// fall back to name order.
inline std::vector<std::string> golden_oracle_ranking(const std::map<std::string, double>& oracle) {
  std::vector<std::pair<std::string, double>> v(oracle.begin(), oracle.end());
  std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
    if (std::abs(a.second - b.second) <= 1e-12 * std::max(1.0, std::abs(b.second))) return a.first < b.first;
    return a.second < b.second;
  });
  std::vector<std::string> names;
  for (const auto& p : v) names.push_back(p.first);
  return names;
}

}  // namespace mmf::test
