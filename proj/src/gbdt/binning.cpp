#include "mmf/gbdt/binning.hpp"

#include <algorithm>
#include <cmath>

#include "mmf/common/error.hpp"

namespace mmf::gbdt {

std::uint8_t FeatureBins::bin_of(double v) const {
  auto it = std::lower_bound(upper.begin(), upper.end(), v);
  if (it == upper.end()) return static_cast<std::uint8_t>(upper.size() - 1);
  return static_cast<std::uint8_t>(it - upper.begin());
}

double FeatureBins::threshold_after(int b) const {
  const double lo = upper[b], hi = lower[b + 1];
  const double t = lo + (hi - lo) / 2.0;
  return t >= hi ? lo : t;
}

FeatureBins make_bins(std::span<const double> values, int max_bins) {
  if (values.empty()) throw InvalidArgument("cannot bin an empty column");
  if (max_bins < 2 || max_bins > kMaxBins) throw InvalidArgument("max_bins out of range");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> distinct = sorted;
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  FeatureBins fb;
  if (static_cast<int>(distinct.size()) <= max_bins) {
    fb.upper = distinct;
  } else {
    const std::size_t n = sorted.size();
    for (int k = 1; k < max_bins; ++k) {
      const double q = sorted[(static_cast<std::size_t>(k) * n) / static_cast<std::size_t>(max_bins)];
      if (fb.upper.empty() || q > fb.upper.back()) fb.upper.push_back(q);
    }
    if (fb.upper.back() < sorted.back()) fb.upper.push_back(sorted.back());
  }
  fb.lower.assign(fb.upper.size(), 0.0);
  std::vector<bool> seen(fb.upper.size(), false);
  for (double v : sorted) {
    const auto b = fb.bin_of(v);
    if (!seen[b]) {
      fb.lower[b] = v;
      seen[b] = true;
    }
  }
  return fb;
}

BinnedMatrix bin_table(const features::FeatureTable& table, int max_bins) {
  BinnedMatrix m;
  m.rows = table.rows();
  m.bins.resize(table.cols());
  m.codes.resize(table.cols());
  const int nf = static_cast<int>(table.cols());
#pragma omp parallel for schedule(dynamic)
  for (int f = 0; f < nf; ++f) {
    auto col = table.column(static_cast<std::size_t>(f));
    m.bins[f] = make_bins(col, max_bins);
    auto& codes = m.codes[f];
    codes.resize(col.size());
    for (std::size_t r = 0; r < col.size(); ++r) codes[r] = m.bins[f].bin_of(col[r]);
  }
  return m;
}

void build_histogram(const BinnedMatrix& m, std::span<const std::uint32_t> rows, std::span<const double> g,
                     std::span<const double> h, std::span<const int> features, Histogram& out) {
  out.resize(m.bins.size() * kMaxBins);
  const int nf = static_cast<int>(features.size());
#pragma omp parallel for schedule(static)
  for (int i = 0; i < nf; ++i) {
    const int f = features[i];
    HistBin* hist = out.data() + static_cast<std::size_t>(f) * kMaxBins;
    std::fill(hist, hist + kMaxBins, HistBin{});
    const std::uint8_t* codes = m.codes[f].data();
    for (std::uint32_t r : rows) {
      HistBin& b = hist[codes[r]];
      b.g += g[r];
      b.h += h[r];
      ++b.n;
    }
  }
}

void subtract_histogram(const Histogram& parent, const Histogram& child, std::span<const int> features,
                        Histogram& out) {
  out.resize(parent.size());
  for (int f : features) {
    const std::size_t base = static_cast<std::size_t>(f) * kMaxBins;
    for (std::size_t b = base; b < base + kMaxBins; ++b) {
      out[b].g = parent[b].g - child[b].g;
      out[b].h = parent[b].h - child[b].h;
      out[b].n = parent[b].n - child[b].n;
    }
  }
}

namespace reference {

void build_histogram(const BinnedMatrix& m, std::span<const std::uint32_t> rows, std::span<const double> g,
                     std::span<const double> h, std::span<const int> features, Histogram& out) {
  out.resize(m.bins.size() * kMaxBins);
  for (int f : features)
    std::fill(out.begin() + static_cast<std::ptrdiff_t>(f) * kMaxBins,
              out.begin() + static_cast<std::ptrdiff_t>(f + 1) * kMaxBins, HistBin{});
  for (std::uint32_t r : rows) {
    for (int f : features) {
      HistBin& b = out[static_cast<std::size_t>(f) * kMaxBins + m.codes[f][r]];
      b.g += g[r];
      b.h += h[r];
      ++b.n;
    }
  }
}

}  // namespace reference

}  // namespace mmf::gbdt
