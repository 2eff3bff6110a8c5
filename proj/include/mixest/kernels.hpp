#pragma once

// Grid kernels: every hot loop over quadrature points lives here, once as a
// serial reference and once OpenMP-parallel. The parallel versions only
// split pointwise work across threads; reductions are summed serially in
// index order so both paths give bit-identical results for any thread count.

#include <cstddef>
#include <span>

#include "mixest/families.hpp"

namespace mixest::kernels {

enum class Exec { Serial, Parallel };

/// Below this many points the parallel kernels fall back to the serial loop.
inline constexpr std::size_t kParallelThreshold = 2048;

/// values[j] = f(x_j | theta); grads (optional) row-major dim() x n.
void family_serial(const KernelFamily& fam, std::span<const double> theta, std::span<const double> x,
                   std::span<double> values, std::span<double> grads);
void family_parallel(const KernelFamily& fam, std::span<const double> theta,
                     std::span<const double> x, std::span<double> values, std::span<double> grads);

/// out[j] = (1/n) sum_i K_sigma(x_j - data_i).
void kde_serial(std::span<const double> data, const SmoothingKernel& k, std::span<const double> x,
                std::span<double> out);
void kde_parallel(std::span<const double> data, const SmoothingKernel& k,
                  std::span<const double> x, std::span<double> out);

/// out[j] = sum_i weights[i] * components[i * n + j].
void mixture_serial(std::span<const double> weights, std::span<const double> components,
                    std::span<double> out);
void mixture_parallel(std::span<const double> weights, std::span<const double> components,
                      std::span<double> out);

/// sum_j w_j sqrt(a_j) sqrt(b_j) with sqrt_b given.
double sqrt_dot_serial(std::span<const double> w, std::span<const double> a,
                       std::span<const double> sqrt_b);
double sqrt_dot_parallel(std::span<const double> w, std::span<const double> a,
                         std::span<const double> sqrt_b);

inline void family(const KernelFamily& fam, std::span<const double> theta, std::span<const double> x,
                   std::span<double> values, std::span<double> grads, Exec e) {
  e == Exec::Parallel ? family_parallel(fam, theta, x, values, grads)
                      : family_serial(fam, theta, x, values, grads);
}
inline void kde(std::span<const double> data, const SmoothingKernel& k, std::span<const double> x,
                std::span<double> out, Exec e) {
  e == Exec::Parallel ? kde_parallel(data, k, x, out) : kde_serial(data, k, x, out);
}
inline void mixture(std::span<const double> weights, std::span<const double> components,
                    std::span<double> out, Exec e) {
  e == Exec::Parallel ? mixture_parallel(weights, components, out)
                      : mixture_serial(weights, components, out);
}
inline double sqrt_dot(std::span<const double> w, std::span<const double> a,
                       std::span<const double> sqrt_b, Exec e) {
  return e == Exec::Parallel ? sqrt_dot_parallel(w, a, sqrt_b) : sqrt_dot_serial(w, a, sqrt_b);
}

}  // namespace mixest::kernels
