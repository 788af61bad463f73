#pragma once

#include <complex>
#include <vector>

namespace mmf::imgio {

using ComplexGrid = std::vector<std::complex<double>>;

// Row-major 2-D DFT of a rows x cols grid. The inverse is scaled by
// 1/(rows*cols) so that inverse(forward(x)) == x. Plans are created once per
// size with FFTW_ESTIMATE, which keeps results reproducible run to run.
ComplexGrid fft2(const ComplexGrid& in, int rows, int cols);
ComplexGrid ifft2(const ComplexGrid& in, int rows, int cols);

// Moves the zero-frequency sample from the centre to index 0 (MATLAB ifftshift).
template <typename T>
std::vector<T> ifftshift(const std::vector<T>& in, int rows, int cols) {
  std::vector<T> out(in.size());
  const int sr = rows / 2;
  const int sc = cols / 2;
  for (int y = 0; y < rows; ++y)
    for (int x = 0; x < cols; ++x)
      out[static_cast<std::size_t>(y) * cols + x] =
          in[static_cast<std::size_t>((y + sr) % rows) * cols + (x + sc) % cols];
  return out;
}

}  // namespace mmf::imgio
