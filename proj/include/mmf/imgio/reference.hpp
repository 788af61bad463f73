#pragma once

// Serial, deliberately naive versions of the parallel kernels. They are kept
// as test oracles and as the baseline in the kernel benchmark.

#include "mmf/imgio/image.hpp"
#include "mmf/imgio/signal.hpp"

namespace mmf::imgio::reference {

// Full 2-D nested-loop correlation; ignores separability.
ImageTensor convolve_same(const ImageTensor& img, const Kernel2D& k,
                          BorderMode border = BorderMode::reflect);

ImageTensor downsample2(const ImageTensor& img);

}  // namespace mmf::imgio::reference
