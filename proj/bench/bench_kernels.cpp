// Serial reference kernels vs their OpenMP versions on a few grid sizes.
// Usage: bench_kernels [reps]

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <vector>

#include "mixest/kernels.hpp"

using namespace mixest;
using Clock = std::chrono::steady_clock;

namespace {

template <class F>
double time_ms(int reps, F&& f) {
  f();  // warm-up
  const auto t0 = Clock::now();
  for (int r = 0; r < reps; ++r) f();
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count() / reps;
}

void row(const char* name, std::size_t n, double serial, double parallel, bool same) {
  std::printf("%-10s %8zu %12.4f %12.4f %8.2fx %s\n", name, n, serial, parallel, serial / parallel,
              same ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  const int reps = argc > 1 ? std::atoi(argv[1]) : 20;
  std::printf("threads: %d\n", omp_get_max_threads());
  std::printf("%-10s %8s %12s %12s %9s\n", "kernel", "points", "serial ms", "parallel ms", "speedup");

  std::mt19937_64 rng(1);
  std::normal_distribution<double> z;
  std::vector<double> data(2000);
  for (double& v : data) v = z(rng);

  const KernelFamily fam = KernelFamily::skew_normal();
  const std::vector<double> theta{0.2, 1.3, 2.0};
  const SmoothingKernel k{KernelTag::Gaussian, 1.0};

  for (std::size_t n : {1025u, 4097u, 16385u}) {
    std::vector<double> x(n);
    for (std::size_t j = 0; j < n; ++j) x[j] = -10.0 + 20.0 * static_cast<double>(j) / static_cast<double>(n - 1);
    std::vector<double> a(n), b(n), ga(3 * n), gb(3 * n);

    double ts = time_ms(reps, [&] { kernels::family_serial(fam, theta, x, a, ga); });
    double tp = time_ms(reps, [&] { kernels::family_parallel(fam, theta, x, b, gb); });
    row("family", n, ts, tp, a == b && ga == gb);

    ts = time_ms(reps, [&] { kernels::kde_serial(data, k, x, a); });
    tp = time_ms(reps, [&] { kernels::kde_parallel(data, k, x, b); });
    row("kde", n, ts, tp, a == b);

    const std::vector<double> w{0.2, 0.3, 0.5};
    std::vector<double> comps(3 * n);
    for (double& c : comps) c = std::abs(z(rng));
    ts = time_ms(reps, [&] { kernels::mixture_serial(w, comps, a); });
    tp = time_ms(reps, [&] { kernels::mixture_parallel(w, comps, b); });
    row("mixture", n, ts, tp, a == b);

    std::vector<double> wq(n, 1.0 / static_cast<double>(n));
    double ss = 0.0, sp = 0.0;
    ts = time_ms(reps * 10, [&] { ss = kernels::sqrt_dot_serial(wq, a, b); });
    tp = time_ms(reps * 10, [&] { sp = kernels::sqrt_dot_parallel(wq, a, b); });
    row("sqrt_dot", n, ts, tp, ss == sp);
  }
  return 0;
}
