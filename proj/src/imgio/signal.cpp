#include "mmf/imgio/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mmf/common/error.hpp"

namespace mmf::imgio {
namespace {

void check_odd(int n, const char* what) {
  if (n < 1 || n % 2 == 0) throw InvalidArgument(std::string(what) + ": kernel sides must be odd");
}

void check_fits(const ImageTensor& img, const Kernel2D& k) {
  if (k.rows() > img.height() || k.cols() > img.width()) {
    throw InvalidArgument("convolve_same: kernel " + std::to_string(k.rows()) + "x" +
                          std::to_string(k.cols()) + " larger than image " +
                          std::to_string(img.height()) + "x" + std::to_string(img.width()));
  }
}

// Two-pass correlation for separable kernels. Each pass runs rows in parallel.
ImageTensor convolve_separable(const ImageTensor& img, const Kernel2D& k, BorderMode border) {
  const int h = img.height();
  const int w = img.width();
  const int ch = img.channels();
  const auto& kc = k.column_factor();
  const auto& kr = k.row_factor();
  const int rr = k.rows() / 2;
  const int rc = k.cols() / 2;

  ImageTensor tmp(h, w, ch);
  auto src = img.values();
  auto mid = tmp.values();
  std::vector<int> xmap(static_cast<std::size_t>(w + 2 * rc));
  for (int i = 0; i < w + 2 * rc; ++i) xmap[i] = border_index(i - rc, w, border);

#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    const double* row = src.data() + static_cast<std::size_t>(y) * w * ch;
    double* out = mid.data() + static_cast<std::size_t>(y) * w * ch;
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (int j = 0; j < k.cols(); ++j) acc += kr[j] * row[xmap[x + j] * ch + c];
        out[x * ch + c] = acc;
      }
    }
  }

  ImageTensor out(h, w, ch);
  auto dst = out.values();
  const std::size_t stride = static_cast<std::size_t>(w) * ch;
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    double* o = dst.data() + y * stride;
    for (int i = 0; i < k.rows(); ++i) {
      const double* r = mid.data() + border_index(y + i - rr, h, border) * stride;
      const double t = kc[i];
      for (std::size_t j = 0; j < stride; ++j) o[j] += t * r[j];
    }
  }
  return out;
}

ImageTensor convolve_dense(const ImageTensor& img, const Kernel2D& k, BorderMode border) {
  const int h = img.height();
  const int w = img.width();
  const int ch = img.channels();
  const int rr = k.rows() / 2;
  const int rc = k.cols() / 2;
  ImageTensor out(h, w, ch);
  auto src = img.values();
  auto dst = out.values();
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (int i = 0; i < k.rows(); ++i) {
          const int yy = border_index(y + i - rr, h, border);
          for (int j = 0; j < k.cols(); ++j) {
            const int xx = border_index(x + j - rc, w, border);
            acc += k.tap(i, j) * src[(static_cast<std::size_t>(yy) * w + xx) * ch + c];
          }
        }
        dst[(static_cast<std::size_t>(y) * w + x) * ch + c] = acc;
      }
    }
  }
  return out;
}

}  // namespace

Kernel2D::Kernel2D(int rows, int cols, std::vector<double> taps, bool normalized)
    : rows_(rows), cols_(cols), taps_(std::move(taps)), normalized_(normalized) {
  check_odd(rows, "Kernel2D");
  check_odd(cols, "Kernel2D");
  if (taps_.size() != static_cast<std::size_t>(rows) * cols)
    throw InvalidArgument("Kernel2D: tap count does not match dimensions");
  if (normalized_) {
    const double sum = std::accumulate(taps_.begin(), taps_.end(), 0.0);
    if (std::abs(sum - 1.0) > 1e-9) throw InvalidArgument("Kernel2D: taps do not sum to one");
  }
}

Kernel2D Kernel2D::separable(std::vector<double> column, std::vector<double> row, bool normalized) {
  std::vector<double> taps(column.size() * row.size());
  for (std::size_t i = 0; i < column.size(); ++i)
    for (std::size_t j = 0; j < row.size(); ++j) taps[i * row.size() + j] = column[i] * row[j];
  Kernel2D k(static_cast<int>(column.size()), static_cast<int>(row.size()), std::move(taps),
             normalized);
  k.column_ = std::move(column);
  k.row_ = std::move(row);
  return k;
}

Kernel2D gaussian_kernel(int size, double sigma) {
  if (size < 1 || size % 2 == 0) throw InvalidArgument("gaussian_kernel: size must be odd");
  if (!(sigma > 0.0)) throw InvalidArgument("gaussian_kernel: sigma must be positive");
  const int r = size / 2;
  std::vector<double> g(size);
  for (int i = 0; i < size; ++i) g[i] = std::exp(-double((i - r) * (i - r)) / (2.0 * sigma * sigma));
  const double sum = std::accumulate(g.begin(), g.end(), 0.0);
  for (double& v : g) v /= sum;
  return Kernel2D::separable(g, g, true);
}

Kernel2D box_kernel(int size) {
  if (size < 1 || size % 2 == 0) throw InvalidArgument("box_kernel: size must be odd");
  std::vector<double> g(size, 1.0 / size);
  return Kernel2D::separable(g, g, true);
}

int border_index(int i, int n, BorderMode border) {
  if (border == BorderMode::replicate) return std::clamp(i, 0, n - 1);
  // Symmetric reflection with period 2n.
  const int period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

ImageTensor convolve_same(const ImageTensor& img, const Kernel2D& k, BorderMode border) {
  check_fits(img, k);
  return k.is_separable() ? convolve_separable(img, k, border) : convolve_dense(img, k, border);
}

ImageTensor downsample2(const ImageTensor& img) {
  if (img.height() < 2 || img.width() < 2)
    throw InvalidArgument("downsample2: image dimensions must be at least 2");
  const int h = img.height() / 2;
  const int w = img.width() / 2;
  const int ch = img.channels();
  ImageTensor out(h, w, ch);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < ch; ++c)
        out.at(y, x, c) = 0.25 * (img.at(2 * y, 2 * x, c) + img.at(2 * y, 2 * x + 1, c) +
                                  img.at(2 * y + 1, 2 * x, c) + img.at(2 * y + 1, 2 * x + 1, c));
  return out;
}

const Kernel2D& pyramid_blur() {
  static const Kernel2D k = gaussian_kernel(5, 1.0);
  return k;
}

ImageTensor expand_to(const ImageTensor& img, int height, int width) {
  ImageTensor up(height, width, img.channels());
  for (int y = 0; y < height; ++y) {
    const int sy = std::min(y / 2, img.height() - 1);
    for (int x = 0; x < width; ++x) {
      const int sx = std::min(x / 2, img.width() - 1);
      for (int c = 0; c < img.channels(); ++c) up.at(y, x, c) = img.at(sy, sx, c);
    }
  }
  return convolve_same(up, pyramid_blur());
}

int max_pyramid_levels(int height, int width) {
  int levels = 0;
  while (height >= 4 && width >= 4) {
    ++levels;
    height /= 2;
    width /= 2;
  }
  return levels;
}

std::vector<ImageTensor> laplacian_pyramid(const ImageTensor& img, int levels) {
  if (levels < 1) throw InvalidArgument("laplacian_pyramid: levels must be >= 1");
  if (levels > max_pyramid_levels(img.height(), img.width())) {
    throw InvalidArgument("laplacian_pyramid: " + std::to_string(levels) + " levels too many for " +
                          std::to_string(img.height()) + "x" + std::to_string(img.width()));
  }
  std::vector<ImageTensor> bands;
  bands.reserve(levels);
  ImageTensor current = img;
  for (int l = 0; l + 1 < levels; ++l) {
    ImageTensor next = downsample2(convolve_same(current, pyramid_blur()));
    ImageTensor band = current;
    const ImageTensor predicted = expand_to(next, current.height(), current.width());
    auto b = band.values();
    auto p = predicted.values();
    for (std::size_t i = 0; i < b.size(); ++i) b[i] -= p[i];
    bands.push_back(std::move(band));
    current = std::move(next);
  }
  bands.push_back(std::move(current));
  return bands;
}

ImageTensor reconstruct_pyramid(const std::vector<ImageTensor>& bands) {
  if (bands.empty()) throw InvalidArgument("reconstruct_pyramid: no bands");
  ImageTensor current = bands.back();
  for (std::size_t l = bands.size() - 1; l-- > 0;) {
    ImageTensor up = expand_to(current, bands[l].height(), bands[l].width());
    auto u = up.values();
    auto b = bands[l].values();
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = b[i] + u[i];
    current = std::move(up);
  }
  return current;
}

}  // namespace mmf::imgio
