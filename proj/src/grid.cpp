#include "mixest/grid.hpp"

#include <cmath>
#include <string>

#include "mixest/error.hpp"

namespace mixest {

QuadratureGrid::QuadratureGrid(double lo, double hi, std::size_t n) : lo_(lo), hi_(hi) {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
    throw InputError("grid needs finite lo < hi");
  if (n < kMinPoints || n % 2 == 0)
    throw InputError("grid size must be odd and >= 257 (got " + std::to_string(n) + ")");
  step_ = (hi - lo) / static_cast<double>(n - 1);
  x_.resize(n);
  w_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    x_[i] = lo + step_ * static_cast<double>(i);
    w_[i] = (i == 0 || i == n - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    w_[i] *= step_ / 3.0;
  }
  x_.back() = hi;
}

double QuadratureGrid::integrate(std::span<const double> f) const {
  double s = 0.0;
  for (std::size_t i = 0; i < w_.size(); ++i) s += w_[i] * f[i];
  return s;
}

double QuadratureGrid::integrate_trapezoid(std::span<const double> f) const {
  double s = 0.5 * (f.front() + f.back());
  for (std::size_t i = 1; i + 1 < f.size(); ++i) s += f[i];
  return s * step_;
}

}  // namespace mixest
