#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "mixest/families.hpp"

namespace mixest {

/// Linear convolution of grid samples with a fixed kernel:
///   out_j = h * sum_i f_i K(x_j - x_i)
/// computed by zero-padded real FFTs. Values of f beyond the grid are taken
/// as zero. Thread-safe after construction.
class FftConvolver {
 public:
  FftConvolver(std::size_t n, double step, const SmoothingKernel& kernel);
  ~FftConvolver();
  FftConvolver(const FftConvolver&) = delete;
  FftConvolver& operator=(const FftConvolver&) = delete;

  std::size_t size() const { return n_; }
  /// `clamp` floors FFT round-off at zero (use for densities, not derivatives).
  void apply(std::span<const double> f, std::span<double> out, bool clamp) const;

 private:
  std::size_t n_;
  std::size_t padded_;
  std::vector<std::complex<double>> kernel_hat_;
  void* forward_ = nullptr;
  void* backward_ = nullptr;
};

}  // namespace mixest
