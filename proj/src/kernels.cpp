#include "mixest/kernels.hpp"

#include <cmath>
#include <vector>

namespace mixest::kernels {

namespace {

inline void family_point(const KernelFamily& fam, std::span<const double> theta,
                         std::span<const double> x, std::span<double> values,
                         std::span<double> grads, std::size_t j) {
  const std::size_t n = x.size();
  if (grads.empty()) {
    values[j] = fam.density_grad(theta, x[j], {});
    return;
  }
  double g[3];
  const std::size_t d = fam.dim();
  values[j] = fam.density_grad(theta, x[j], std::span<double>(g, d));
  for (std::size_t k = 0; k < d; ++k) grads[k * n + j] = g[k];
}

inline double kde_point(std::span<const double> data, const SmoothingKernel& k, double x) {
  double s = 0.0;
  for (double v : data) s += k.density(x - v);
  return s / static_cast<double>(data.size());
}

}  // namespace

void family_serial(const KernelFamily& fam, std::span<const double> theta, std::span<const double> x,
                   std::span<double> values, std::span<double> grads) {
  for (std::size_t j = 0; j < x.size(); ++j) family_point(fam, theta, x, values, grads, j);
}

void family_parallel(const KernelFamily& fam, std::span<const double> theta,
                     std::span<const double> x, std::span<double> values, std::span<double> grads) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static) if (x.size() >= kParallelThreshold)
  for (std::ptrdiff_t j = 0; j < n; ++j)
    family_point(fam, theta, x, values, grads, static_cast<std::size_t>(j));
}

void kde_serial(std::span<const double> data, const SmoothingKernel& k, std::span<const double> x,
                std::span<double> out) {
  for (std::size_t j = 0; j < x.size(); ++j) out[j] = kde_point(data, k, x[j]);
}

void kde_parallel(std::span<const double> data, const SmoothingKernel& k,
                  std::span<const double> x, std::span<double> out) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < n; ++j) out[j] = kde_point(data, k, x[j]);
}

void mixture_serial(std::span<const double> weights, std::span<const double> components,
                    std::span<double> out) {
  const std::size_t n = out.size();
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) s += weights[i] * components[i * n + j];
    out[j] = s;
  }
}

void mixture_parallel(std::span<const double> weights, std::span<const double> components,
                      std::span<double> out) {
  const std::size_t n = out.size();
  const std::ptrdiff_t sn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static) if (n >= kParallelThreshold)
  for (std::ptrdiff_t j = 0; j < sn; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i)
      s += weights[i] * components[i * n + static_cast<std::size_t>(j)];
    out[j] = s;
  }
}

double sqrt_dot_serial(std::span<const double> w, std::span<const double> a,
                       std::span<const double> sqrt_b) {
  double s = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * std::sqrt(a[j]) * sqrt_b[j];
  return s;
}

double sqrt_dot_parallel(std::span<const double> w, std::span<const double> a,
                         std::span<const double> sqrt_b) {
  const std::size_t n = w.size();
  if (n < kParallelThreshold) return sqrt_dot_serial(w, a, sqrt_b);
  std::vector<double> terms(n);
  const std::ptrdiff_t sn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < sn; ++j) terms[j] = w[j] * std::sqrt(a[j]) * sqrt_b[j];
  double s = 0.0;
  for (double t : terms) s += t;
  return s;
}

}  // namespace mixest::kernels
