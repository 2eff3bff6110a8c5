#include "mixest/divergences.hpp"

#include <cmath>
#include <sstream>

#include "mixest/error.hpp"

namespace mixest {

namespace {

void check(std::span<const double> p, std::span<const double> q, const QuadratureGrid& grid) {
  if (p.size() != grid.size() || q.size() != grid.size())
    throw InputError("density vector does not match the grid");
}

}  // namespace

double affinity(std::span<const double> p, std::span<const double> q, const QuadratureGrid& grid) {
  check(p, q, grid);
  const auto& w = grid.weights();
  double s = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    if (p[j] < 0.0 || q[j] < 0.0) throw InputError("density vector has negative entries");
    s += w[j] * std::sqrt(p[j] * q[j]);
  }
  return s;
}

double hellinger_from_affinity(double a) {
  if (a > 1.0 + 1e-12) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "affinity " << a << " exceeds 1 beyond round-off; grid too coarse for these densities";
    throw NumericalError(msg.str());
  }
  return std::sqrt(std::max(0.0, 1.0 - a));
}

DivergenceValue hellinger_value(std::span<const double> p, std::span<const double> q,
                                const QuadratureGrid& grid) {
  const double a = affinity(p, q, grid);
  return {hellinger_from_affinity(a), std::min(a, 1.0)};
}

double hellinger(std::span<const double> p, std::span<const double> q, const QuadratureGrid& grid) {
  return hellinger_value(p, q, grid).value;
}

double total_variation(std::span<const double> p, std::span<const double> q,
                       const QuadratureGrid& grid) {
  check(p, q, grid);
  const auto& w = grid.weights();
  double s = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * std::abs(p[j] - q[j]);
  return std::min(1.0, 0.5 * s);
}

double weighted_hellinger(std::span<const double> p1, std::span<const double> p2,
                          std::span<const double> ref_num, std::span<const double> ref_den,
                          const QuadratureGrid& grid) {
  check(p1, p2, grid);
  check(ref_num, ref_den, grid);
  const auto& w = grid.weights();
  const auto& x = grid.points();
  double s = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    const double d = std::sqrt(p1[j]) - std::sqrt(p2[j]);
    const double integrand = d * d;
    if (ref_den[j] < 1e-300) {
      if (integrand == 0.0) continue;
      // Report the contiguous region of undefined weight starting here.
      std::size_t k = j;
      while (k + 1 < w.size() && ref_den[k + 1] < 1e-300) ++k;
      std::ostringstream msg;
      msg << "weighted Hellinger weight undefined (reference density ~0) on x in [" << x[j]
          << ", " << x[k] << "]";
      throw NumericalError(msg.str());
    }
    s += w[j] * integrand * std::sqrt(ref_num[j] / ref_den[j]);
  }
  return std::sqrt(std::max(0.0, 0.5 * s));
}

}  // namespace mixest
