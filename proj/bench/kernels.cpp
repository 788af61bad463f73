// Parallel kernels vs their serial reference versions.
//   mmf_kernel_bench [--size N] [--reps R]
#include <omp.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <numeric>
#include <string>

#include <CLI11.hpp>

#include "mmf/common/random.hpp"
#include "mmf/features/table.hpp"
#include "mmf/gbdt/binning.hpp"
#include "mmf/imgio/reference.hpp"
#include "mmf/imgio/signal.hpp"

using namespace mmf;

namespace {

double time_ms(int reps, const std::function<void()>& fn) {
  fn();
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) fn();
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count() / reps;
}

void row(const char* name, double par, double ser, bool same) {
  std::printf("%-18s %10.3f %10.3f %8.2fx  %s\n", name, par, ser, ser / par, same ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kernel benchmark: parallel vs serial reference"};
  int size = 256, reps = 20;
  std::size_t rows = 100000;
  app.add_option("--size", size, "Image side")->capture_default_str();
  app.add_option("--reps", reps, "Timed repetitions")->capture_default_str();
  app.add_option("--rows", rows, "Histogram rows")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  Rng rng(7);
  imgio::ImageTensor img(size, size, 3);
  for (double& v : img.values()) v = uniform01(rng);
  const auto k = imgio::gaussian_kernel(11, 1.5);

  std::printf("threads: %d, image %dx%dx3, %d reps\n", omp_get_max_threads(), size, size, reps);
  std::printf("%-18s %10s %10s %9s\n", "kernel", "par ms", "serial ms", "speedup");

  imgio::ImageTensor a, b;
  const double cp = time_ms(reps, [&] { a = imgio::convolve_same(img, k); });
  const double cs = time_ms(reps, [&] { b = imgio::reference::convolve_same(img, k); });
  // The separable and nested-loop forms round differently; compare loosely.
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a.values()[i] - b.values()[i]));
  row("convolve_same", cp, cs, worst < 1e-12);

  const double dp = time_ms(reps, [&] { a = imgio::downsample2(img); });
  const double ds = time_ms(reps, [&] { b = imgio::reference::downsample2(img); });
  row("downsample2", dp, ds, a == b);

  const int nf = 16;
  std::vector<std::string> names;
  for (int f = 0; f < nf; ++f) names.push_back("f" + std::to_string(f));
  features::FeatureTable t(names);
  std::vector<double> vals(nf);
  for (std::size_t r = 0; r < rows; ++r) {
    for (double& v : vals) v = normal(rng);
    t.add_row("r" + std::to_string(r), "m", "g", vals);
  }
  const auto m = gbdt::bin_table(t);
  std::vector<double> g(rows), h(rows, 1.0);
  for (double& v : g) v = normal(rng);
  std::vector<std::uint32_t> idx(rows);
  std::iota(idx.begin(), idx.end(), 0u);
  std::vector<int> feats(nf);
  std::iota(feats.begin(), feats.end(), 0);
  gbdt::Histogram hp, hs;
  const double hpar = time_ms(reps, [&] { gbdt::build_histogram(m, idx, g, h, feats, hp); });
  const double hser = time_ms(reps, [&] { gbdt::reference::build_histogram(m, idx, g, h, feats, hs); });
  bool same = hp.size() == hs.size();
  for (std::size_t i = 0; same && i < hp.size(); ++i)
    same = hp[i].g == hs[i].g && hp[i].h == hs[i].h && hp[i].n == hs[i].n;
  row("build_histogram", hpar, hser, same);
  return 0;
}
