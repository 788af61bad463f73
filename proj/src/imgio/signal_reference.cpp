#include "mmf/imgio/reference.hpp"

#include "mmf/common/error.hpp"

namespace mmf::imgio::reference {

ImageTensor convolve_same(const ImageTensor& img, const Kernel2D& k, BorderMode border) {
  if (k.rows() > img.height() || k.cols() > img.width())
    throw InvalidArgument("reference::convolve_same: kernel larger than image");
  const int rr = k.rows() / 2;
  const int rc = k.cols() / 2;
  ImageTensor out(img.height(), img.width(), img.channels());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < img.channels(); ++c) {
        double acc = 0.0;
        for (int i = 0; i < k.rows(); ++i)
          for (int j = 0; j < k.cols(); ++j)
            acc += k.tap(i, j) * img.at(border_index(y + i - rr, img.height(), border),
                                        border_index(x + j - rc, img.width(), border), c);
        out.at(y, x, c) = acc;
      }
  return out;
}

ImageTensor downsample2(const ImageTensor& img) {
  if (img.height() < 2 || img.width() < 2)
    throw InvalidArgument("reference::downsample2: image dimensions must be at least 2");
  ImageTensor out(img.height() / 2, img.width() / 2, img.channels());
  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x)
      for (int c = 0; c < img.channels(); ++c) {
        double acc = 0.0;
        for (int dy = 0; dy < 2; ++dy)
          for (int dx = 0; dx < 2; ++dx) acc += img.at(2 * y + dy, 2 * x + dx, c);
        out.at(y, x, c) = acc / 4.0;
      }
  return out;
}

}  // namespace mmf::imgio::reference
