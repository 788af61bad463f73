#pragma once

// Helpers shared by the FSIM and VSI translation units.

#include <complex>
#include <vector>

#include "mmf/imgio/image.hpp"

namespace mmf::metrics::detail {

// F x F block average keeping every F-th sample (no-op for F = 1), where
// F = max(1, round(min_side / 256)).
imgio::ImageTensor reference_downsample(const imgio::ImageTensor& img);

// Scharr gradient magnitude of a single-channel image.
imgio::ImageTensor scharr_magnitude(const imgio::ImageTensor& gray);

// Centred frequency coordinates following the odd/even convention of the
// log-Gabor reference code, already ifftshift-ed (DC at index 0).
struct FrequencyGrid {
  std::vector<double> u;  // horizontal
  std::vector<double> v;  // vertical
};
FrequencyGrid frequency_grid(int rows, int cols);

}  // namespace mmf::metrics::detail
