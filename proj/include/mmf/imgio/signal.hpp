#pragma once

#include <optional>
#include <vector>

#include "mmf/imgio/image.hpp"

namespace mmf::imgio {

enum class BorderMode {
  reflect,    // symmetric: ... c b a | a b c ... (edge sample repeated)
  replicate,  // clamp to the edge sample
};

// Dense 2-D filter with odd side lengths. Separable kernels additionally keep
// their 1-D factors so convolve_same can take the two-pass route.
class Kernel2D {
 public:
  Kernel2D(int rows, int cols, std::vector<double> taps, bool normalized = false);
  static Kernel2D separable(std::vector<double> column, std::vector<double> row,
                            bool normalized = false);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double tap(int r, int c) const { return taps_[static_cast<std::size_t>(r) * cols_ + c]; }
  const std::vector<double>& taps() const { return taps_; }
  bool normalized() const { return normalized_; }
  bool is_separable() const { return column_.has_value(); }
  const std::vector<double>& column_factor() const { return *column_; }
  const std::vector<double>& row_factor() const { return *row_; }

 private:
  int rows_;
  int cols_;
  std::vector<double> taps_;
  bool normalized_;
  std::optional<std::vector<double>> column_;
  std::optional<std::vector<double>> row_;
};

// Normalized separable Gaussian window of side `size` (odd).
Kernel2D gaussian_kernel(int size, double sigma);

// size x size averaging window.
Kernel2D box_kernel(int size);

// Correlates every channel with `k`; output has the input's shape. Rows are
// processed in parallel; each output sample is computed by one thread in a
// fixed order, so results do not depend on the thread count.
ImageTensor convolve_same(const ImageTensor& img, const Kernel2D& k,
                          BorderMode border = BorderMode::reflect);

// 2x2 average pooling; output dims are floor(dim/2).
ImageTensor downsample2(const ImageTensor& img);

// Nearest-neighbour 2x upsampling to exactly (height, width), followed by the
// pyramid blur. Used by the Laplacian pyramid for both analysis and synthesis.
ImageTensor expand_to(const ImageTensor& img, int height, int width);

// Kernel used for pyramid reduction and expansion (5x5, sigma 1).
const Kernel2D& pyramid_blur();

// levels-1 band-pass images followed by the low-pass residual.
std::vector<ImageTensor> laplacian_pyramid(const ImageTensor& img, int levels);
ImageTensor reconstruct_pyramid(const std::vector<ImageTensor>& bands);

// Largest level count whose coarsest level is at least 4x4.
int max_pyramid_levels(int height, int width);

// Maps an out-of-range index into [0, n) per the border mode.
int border_index(int i, int n, BorderMode border);

}  // namespace mmf::imgio
