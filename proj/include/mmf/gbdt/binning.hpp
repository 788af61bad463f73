#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mmf/features/table.hpp"

namespace mmf::gbdt {

inline constexpr int kMaxBins = 256;

// Quantile bins of one feature. Every bin holds at least one training value;
// lower/upper are the smallest and largest training values inside it.
struct FeatureBins {
  std::vector<double> lower;
  std::vector<double> upper;

  int count() const { return static_cast<int>(upper.size()); }
  std::uint8_t bin_of(double v) const;
  // Split threshold separating bins [0, b] from [b + 1, count): values
  // x <= threshold_after(b) fall left.
  double threshold_after(int b) const;
};

FeatureBins make_bins(std::span<const double> values, int max_bins = kMaxBins);

// Column-major bin codes for every feature of a table.
struct BinnedMatrix {
  std::size_t rows = 0;
  std::vector<FeatureBins> bins;
  std::vector<std::vector<std::uint8_t>> codes;
};

BinnedMatrix bin_table(const features::FeatureTable& table, int max_bins = kMaxBins);

struct HistBin {
  double g = 0.0;  // weighted residual sum
  double h = 0.0;  // weight sum
  std::uint32_t n = 0;
};

// Flat histogram, kMaxBins slots per feature of the matrix.
using Histogram = std::vector<HistBin>;

// Accumulates rows into the histogram slots of `features` (other slots are
// left untouched). Parallel over features; each slot is summed in row order.
void build_histogram(const BinnedMatrix& m, std::span<const std::uint32_t> rows, std::span<const double> g,
                     std::span<const double> h, std::span<const int> features, Histogram& out);

// out = parent - child for the slots of `features`.
void subtract_histogram(const Histogram& parent, const Histogram& child, std::span<const int> features,
                        Histogram& out);

namespace reference {

// Single loop over rows, then features. Same per-slot summation order as the
// parallel version, so results are bit-identical.
void build_histogram(const BinnedMatrix& m, std::span<const std::uint32_t> rows, std::span<const double> g,
                     std::span<const double> h, std::span<const int> features, Histogram& out);

}  // namespace reference

}  // namespace mmf::gbdt
