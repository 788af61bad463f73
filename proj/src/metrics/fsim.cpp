#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <utility>

#include "mmf/common/error.hpp"
#include "mmf/imgio/fft.hpp"
#include "mmf/imgio/signal.hpp"
#include "mmf/metrics/constants.hpp"
#include "mmf/metrics/detail.hpp"
#include "mmf/metrics/metrics.hpp"

namespace mmf::metrics {

namespace detail {

imgio::ImageTensor reference_downsample(const imgio::ImageTensor& img) {
  const int factor = std::max(1, static_cast<int>(std::lround(std::min(img.height(), img.width()) / 256.0)));
  if (factor == 1) return img;
  const int h = img.height() / factor;
  const int w = img.width() / factor;
  imgio::ImageTensor out(h, w, img.channels());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < img.channels(); ++c) {
        double acc = 0.0;
        for (int dy = 0; dy < factor; ++dy)
          for (int dx = 0; dx < factor; ++dx) acc += img.at(y * factor + dy, x * factor + dx, c);
        out.at(y, x, c) = acc / (factor * factor);
      }
  return out;
}

imgio::ImageTensor scharr_magnitude(const imgio::ImageTensor& gray) {
  static const imgio::Kernel2D kx =
      imgio::Kernel2D::separable({3.0 / 16, 10.0 / 16, 3.0 / 16}, {1.0, 0.0, -1.0});
  static const imgio::Kernel2D ky =
      imgio::Kernel2D::separable({1.0, 0.0, -1.0}, {3.0 / 16, 10.0 / 16, 3.0 / 16});
  const auto gx = imgio::convolve_same(gray, kx);
  const auto gy = imgio::convolve_same(gray, ky);
  imgio::ImageTensor out(gray.height(), gray.width(), 1);
  auto px = gx.values();
  auto py = gy.values();
  auto o = out.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = std::sqrt(px[i] * px[i] + py[i] * py[i]);
  return out;
}

FrequencyGrid frequency_grid(int rows, int cols) {
  auto axis = [](int n) {
    std::vector<double> r(n);
    for (int i = 0; i < n; ++i)
      r[i] = n % 2 ? (i - (n - 1) / 2.0) / (n - 1) : (i - n / 2.0) / n;
    return r;
  };
  const auto xr = axis(cols);
  const auto yr = axis(rows);
  std::vector<double> u(static_cast<std::size_t>(rows) * cols), v(u.size());
  for (int y = 0; y < rows; ++y)
    for (int x = 0; x < cols; ++x) {
      u[static_cast<std::size_t>(y) * cols + x] = xr[x];
      v[static_cast<std::size_t>(y) * cols + x] = yr[y];
    }
  return {imgio::ifftshift(u, rows, cols), imgio::ifftshift(v, rows, cols)};
}

}  // namespace detail

namespace {

namespace c = constants;

// Image-independent part of the log-Gabor bank for one grid size.
struct PcBank {
  int rows = 0;
  int cols = 0;
  std::vector<std::vector<std::vector<double>>> filters;  // [orientation][scale] frequency response
  std::vector<double> em_n;                               // sum of squared smallest-scale filter
  std::vector<double> sum_an2;                            // sum over pixels of spatial filter^2
  std::vector<double> sum_aiaj;                           // sum of cross-scale spatial products
};

std::unique_ptr<PcBank> build_bank(int rows, int cols) {
  auto bank = std::make_unique<PcBank>();
  bank->rows = rows;
  bank->cols = cols;
  const std::size_t n = static_cast<std::size_t>(rows) * cols;
  const auto grid = detail::frequency_grid(rows, cols);
  std::vector<double> radius(n), theta(n), lowpass(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = std::sqrt(grid.u[i] * grid.u[i] + grid.v[i] * grid.v[i]);
    lowpass[i] = 1.0 / (1.0 + std::pow(r / 0.45, 2 * 15));
    radius[i] = i == 0 ? 1.0 : r;
    theta[i] = std::atan2(-grid.v[i], grid.u[i]);
  }

  std::vector<std::vector<double>> log_gabor(c::kPcScales, std::vector<double>(n));
  for (int s = 0; s < c::kPcScales; ++s) {
    const double wavelength = c::kPcMinWavelength * std::pow(c::kPcMult, s);
    const double fo = 1.0 / wavelength;
    const double denom = 2.0 * std::pow(std::log(c::kPcSigmaOnf), 2);
    for (std::size_t i = 0; i < n; ++i) {
      const double lr = std::log(radius[i] / fo);
      log_gabor[s][i] = std::exp(-(lr * lr) / denom) * lowpass[i];
    }
    log_gabor[s][0] = 0.0;
  }

  const double theta_sigma = std::numbers::pi / c::kPcOrientations / c::kPcDThetaOnSigma;
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  bank->filters.assign(c::kPcOrientations, {});
  for (int o = 0; o < c::kPcOrientations; ++o) {
    const double angle = o * std::numbers::pi / c::kPcOrientations;
    std::vector<double> spread(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double ds = std::sin(theta[i]) * std::cos(angle) - std::cos(theta[i]) * std::sin(angle);
      const double dc = std::cos(theta[i]) * std::cos(angle) + std::sin(theta[i]) * std::sin(angle);
      const double dtheta = std::abs(std::atan2(ds, dc));
      spread[i] = std::exp(-(dtheta * dtheta) / (2.0 * theta_sigma * theta_sigma));
    }
    std::vector<std::vector<double>> spatial;
    for (int s = 0; s < c::kPcScales; ++s) {
      std::vector<double> f(n);
      for (std::size_t i = 0; i < n; ++i) f[i] = log_gabor[s][i] * spread[i];
      imgio::ComplexGrid fg(f.begin(), f.end());
      const auto sp = imgio::ifft2(fg, rows, cols);
      std::vector<double> real(n);
      for (std::size_t i = 0; i < n; ++i) real[i] = sp[i].real() * sqrt_n;
      spatial.push_back(std::move(real));
      if (s == 0) {
        double em = 0.0;
        for (double v : f) em += v * v;
        bank->em_n.push_back(em);
      }
      bank->filters[o].push_back(std::move(f));
    }
    double an2 = 0.0, aiaj = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (int s = 0; s < c::kPcScales; ++s) an2 += spatial[s][i] * spatial[s][i];
      for (int si = 0; si + 1 < c::kPcScales; ++si)
        for (int sj = si + 1; sj < c::kPcScales; ++sj) aiaj += spatial[si][i] * spatial[sj][i];
    }
    bank->sum_an2.push_back(an2);
    bank->sum_aiaj.push_back(aiaj);
  }
  return bank;
}

const PcBank& bank_for(int rows, int cols) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::unique_ptr<PcBank>> banks;
  std::lock_guard lock(mutex);
  auto& slot = banks[{rows, cols}];
  if (!slot) slot = build_bank(rows, cols);
  return *slot;
}

}  // namespace

ImageTensor phase_congruency(const ImageTensor& gray) {
  if (gray.channels() != 1) throw InvalidArgument("phase_congruency: expected one channel");
  const int rows = gray.height();
  const int cols = gray.width();
  const std::size_t n = gray.pixel_count();
  const PcBank& bank = bank_for(rows, cols);
  const auto vals = gray.values();
  const auto spectrum = imgio::fft2(imgio::ComplexGrid(vals.begin(), vals.end()), rows, cols);

  std::vector<double> energy_all(n, 0.0), an_all(n, 0.0);
  for (int o = 0; o < c::kPcOrientations; ++o) {
    std::vector<imgio::ComplexGrid> eo;
    std::vector<double> sum_e(n, 0.0), sum_o(n, 0.0), sum_an(n, 0.0);
    for (int s = 0; s < c::kPcScales; ++s) {
      imgio::ComplexGrid filtered(n);
      const auto& f = bank.filters[o][s];
      for (std::size_t i = 0; i < n; ++i) filtered[i] = spectrum[i] * f[i];
      eo.push_back(imgio::ifft2(filtered, rows, cols));
      for (std::size_t i = 0; i < n; ++i) {
        sum_an[i] += std::abs(eo[s][i]);
        sum_e[i] += eo[s][i].real();
        sum_o[i] += eo[s][i].imag();
      }
    }
    std::vector<double> energy(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double x_energy = std::sqrt(sum_e[i] * sum_e[i] + sum_o[i] * sum_o[i]) + c::kPcEpsilon;
      const double mean_e = sum_e[i] / x_energy;
      const double mean_o = sum_o[i] / x_energy;
      for (int s = 0; s < c::kPcScales; ++s) {
        const double e = eo[s][i].real();
        const double od = eo[s][i].imag();
        energy[i] += e * mean_e + od * mean_o - std::abs(e * mean_o - od * mean_e);
      }
    }

    // Noise estimate from the smallest-scale response.
    std::vector<double> e2(n);
    for (std::size_t i = 0; i < n; ++i) e2[i] = std::norm(eo[0][i]);
    std::nth_element(e2.begin(), e2.begin() + n / 2, e2.end());
    double median = e2[n / 2];
    if (n % 2 == 0) {
      const double lower = *std::max_element(e2.begin(), e2.begin() + n / 2);
      median = 0.5 * (median + lower);
    }
    const double mean_e2n = -median / std::log(0.5);
    const double noise_power = mean_e2n / bank.em_n[o];
    const double est_noise_energy2 = 2.0 * noise_power * bank.sum_an2[o] + 4.0 * noise_power * bank.sum_aiaj[o];
    const double tau = std::sqrt(est_noise_energy2 / 2.0);
    const double est_noise_energy = tau * std::sqrt(std::numbers::pi / 2.0);
    const double est_noise_sigma = std::sqrt((2.0 - std::numbers::pi / 2.0) * tau * tau);
    const double threshold = (est_noise_energy + c::kPcNoiseK * est_noise_sigma) / 1.7;

    for (std::size_t i = 0; i < n; ++i) {
      energy_all[i] += std::max(energy[i] - threshold, 0.0);
      an_all[i] += sum_an[i];
    }
  }

  ImageTensor pc(rows, cols, 1);
  auto out = pc.values();
  for (std::size_t i = 0; i < n; ++i) out[i] = energy_all[i] / (an_all[i] + c::kPcEpsilon);
  return pc;
}

double fsim(const ImageTensor& a, const ImageTensor& b) {
  imgio::require_same_shape(a, b, "fsim");
  if (a.height() < c::kMinSideFsim || a.width() < c::kMinSideFsim)
    throw InvalidArgument("fsim: image must be at least 64x64");
  const ImageTensor ya = detail::reference_downsample(imgio::to_grayscale(a).scaled(255.0));
  const ImageTensor yb = detail::reference_downsample(imgio::to_grayscale(b).scaled(255.0));
  const ImageTensor pa = phase_congruency(ya);
  const ImageTensor pb = phase_congruency(yb);
  const ImageTensor ga = detail::scharr_magnitude(ya);
  const ImageTensor gb = detail::scharr_magnitude(yb);

  auto p1 = pa.values();
  auto p2 = pb.values();
  auto g1 = ga.values();
  auto g2 = gb.values();
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < p1.size(); ++i) {
    const double s_pc = (2.0 * p1[i] * p2[i] + c::kFsimT1) / (p1[i] * p1[i] + p2[i] * p2[i] + c::kFsimT1);
    const double s_g = (2.0 * g1[i] * g2[i] + c::kFsimT2) / (g1[i] * g1[i] + g2[i] * g2[i] + c::kFsimT2);
    const double pcm = std::max(p1[i], p2[i]);
    num += s_g * s_pc * pcm;
    den += pcm;
  }
  // Both phase-congruency maps vanish (flat pair): no evidence of difference.
  if (den < 1e-6 * static_cast<double>(p1.size())) return 1.0;
  return num / den;
}

}  // namespace mmf::metrics
