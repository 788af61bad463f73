#include "mmf/imgio/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>
#include <utility>

#include "mmf/common/error.hpp"

namespace mmf::imgio {
namespace {

// FFTW planning is not thread-safe; execution with the new-array interface is.
struct PlanCache {
  std::mutex mutex;
  std::map<std::tuple<int, int, int>, fftw_plan> plans;

  fftw_plan get(int rows, int cols, int sign) {
    std::lock_guard lock(mutex);
    auto key = std::make_tuple(rows, cols, sign);
    if (auto it = plans.find(key); it != plans.end()) return it->second;
    auto* in = fftw_alloc_complex(static_cast<std::size_t>(rows) * cols);
    auto* out = fftw_alloc_complex(static_cast<std::size_t>(rows) * cols);
    fftw_plan plan = fftw_plan_dft_2d(rows, cols, in, out, sign, FFTW_ESTIMATE);
    fftw_free(in);
    fftw_free(out);
    if (!plan) throw Error("fftw: failed to create plan");
    plans.emplace(key, plan);
    return plan;
  }

  ~PlanCache() {
    for (auto& [key, plan] : plans) fftw_destroy_plan(plan);
  }
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

ComplexGrid run(const ComplexGrid& in, int rows, int cols, int sign) {
  const std::size_t n = static_cast<std::size_t>(rows) * cols;
  if (in.size() != n) throw InvalidArgument("fft2: grid size does not match dimensions");
  fftw_plan plan = cache().get(rows, cols, sign);
  std::unique_ptr<fftw_complex, decltype(&fftw_free)> a(fftw_alloc_complex(n), fftw_free);
  std::unique_ptr<fftw_complex, decltype(&fftw_free)> b(fftw_alloc_complex(n), fftw_free);
  std::memcpy(a.get(), in.data(), n * sizeof(fftw_complex));
  fftw_execute_dft(plan, a.get(), b.get());
  ComplexGrid out(n);
  std::memcpy(static_cast<void*>(out.data()), b.get(), n * sizeof(fftw_complex));
  return out;
}

}  // namespace

ComplexGrid fft2(const ComplexGrid& in, int rows, int cols) {
  return run(in, rows, cols, FFTW_FORWARD);
}

ComplexGrid ifft2(const ComplexGrid& in, int rows, int cols) {
  ComplexGrid out = run(in, rows, cols, FFTW_BACKWARD);
  const double scale = 1.0 / (static_cast<double>(rows) * cols);
  for (auto& v : out) v *= scale;
  return out;
}

}  // namespace mmf::imgio
