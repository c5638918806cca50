#include "stresscast/fft.hpp"

#include <algorithm>
#include <cstring>
#include <mutex>
#include <stdexcept>

#include <fftw3.h>

namespace stresscast::fft {

namespace {

// FFTW's planner is not thread-safe; execution on a private plan is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwBuffer {
  explicit FftwBuffer(std::size_t n) : data(fftw_alloc_complex(n)) {
    if (data == nullptr) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  fftw_complex* data;
};

std::vector<std::complex<double>> transform(std::span<const std::complex<double>> x, int sign) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  FftwBuffer in(n);
  FftwBuffer out(n);
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_1d(static_cast<int>(n), in.data, out.data, sign, FFTW_ESTIMATE);
  }
  if (plan == nullptr) throw std::runtime_error("fftw: planning failed");
  std::memcpy(in.data, x.data(), n * sizeof(fftw_complex));
  fftw_execute(plan);
  std::vector<std::complex<double>> result(n);
  std::memcpy(result.data(), out.data, n * sizeof(fftw_complex));
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  return result;
}

}  // namespace

std::vector<std::complex<double>> forward(std::span<const std::complex<double>> x) {
  return transform(x, FFTW_FORWARD);
}

std::vector<std::complex<double>> forward(std::span<const double> x) {
  std::vector<std::complex<double>> cx(x.begin(), x.end());
  return transform(cx, FFTW_FORWARD);
}

std::vector<std::complex<double>> inverse(std::span<const std::complex<double>> X) {
  return transform(X, FFTW_BACKWARD);
}

}  // namespace stresscast::fft
