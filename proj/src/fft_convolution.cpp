#include "fft_convolution.hpp"

#include <fftw3.h>

#include <algorithm>
#include <memory>
#include <mutex>

namespace mixest {

namespace {

// The FFTW planner is not thread-safe; execution with new-array functions is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};
using RealBuf = std::unique_ptr<double, FftwFree>;
using CplxBuf = std::unique_ptr<fftw_complex, FftwFree>;

RealBuf alloc_real(std::size_t n) { return RealBuf(fftw_alloc_real(n)); }
CplxBuf alloc_complex(std::size_t n) { return CplxBuf(fftw_alloc_complex(n)); }

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace

FftConvolver::FftConvolver(std::size_t n, double step, const SmoothingKernel& kernel)
    : n_(n), padded_(next_pow2(3 * n)) {
  const std::size_t nc = padded_ / 2 + 1;
  RealBuf in = alloc_real(padded_);
  CplxBuf spec = alloc_complex(nc);
  {
    std::lock_guard lock(planner_mutex());
    const int p = static_cast<int>(padded_);
    forward_ = fftw_plan_dft_r2c_1d(p, in.get(), spec.get(), FFTW_ESTIMATE);
    backward_ = fftw_plan_dft_c2r_1d(p, spec.get(), in.get(), FFTW_ESTIMATE);
  }
  // Kernel lags -(n-1)..(n-1) stored with offset n-1.
  double* k = in.get();
  for (std::size_t i = 0; i < padded_; ++i) k[i] = 0.0;
  for (std::size_t l = 0; l < 2 * n - 1; ++l) {
    const double lag = (static_cast<double>(l) - static_cast<double>(n - 1)) * step;
    k[l] = kernel.density(lag) * step;
  }
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_), k, spec.get());
  kernel_hat_.resize(nc);
  for (std::size_t i = 0; i < nc; ++i) kernel_hat_[i] = {spec.get()[i][0], spec.get()[i][1]};
}

FftConvolver::~FftConvolver() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_));
  fftw_destroy_plan(static_cast<fftw_plan>(backward_));
}

void FftConvolver::apply(std::span<const double> f, std::span<double> out, bool clamp) const {
  const std::size_t nc = padded_ / 2 + 1;
  RealBuf buf = alloc_real(padded_);
  CplxBuf spec = alloc_complex(nc);
  double* b = buf.get();
  for (std::size_t i = 0; i < n_; ++i) b[i] = f[i];
  for (std::size_t i = n_; i < padded_; ++i) b[i] = 0.0;
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_), b, spec.get());
  for (std::size_t i = 0; i < nc; ++i) {
    // Written out: std::complex multiplication goes through __muldc3.
    const double a = spec.get()[i][0], b = spec.get()[i][1];
    const double c = kernel_hat_[i].real(), d = kernel_hat_[i].imag();
    spec.get()[i][0] = a * c - b * d;
    spec.get()[i][1] = a * d + b * c;
  }
  fftw_execute_dft_c2r(static_cast<fftw_plan>(backward_), spec.get(), b);
  const double norm = 1.0 / static_cast<double>(padded_);
  // Full linear convolution index m = j + (n - 1) lines up with grid point j.
  for (std::size_t j = 0; j < n_; ++j) {
    const double v = b[j + n_ - 1] * norm;
    out[j] = clamp ? std::max(0.0, v) : v;
  }
}

}  // namespace mixest
