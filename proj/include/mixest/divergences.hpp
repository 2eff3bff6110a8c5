#pragma once

#include <span>

#include "mixest/grid.hpp"

namespace mixest {

/// Affinity-form result: hellinger^2 + affinity = 1 (after clamping).
struct DivergenceValue {
  double value = 0.0;
  double affinity = 1.0;
};

/// Integral of sqrt(p q) over the grid.
double affinity(std::span<const double> p, std::span<const double> q, const QuadratureGrid& grid);

/// h(p, q) = sqrt(1 - int sqrt(p q)). Affinity above 1 by <= 1e-12 is
/// clamped; a larger excess throws NumericalError.
DivergenceValue hellinger_value(std::span<const double> p, std::span<const double> q,
                                const QuadratureGrid& grid);
double hellinger(std::span<const double> p, std::span<const double> q, const QuadratureGrid& grid);

/// Converts an affinity into a Hellinger distance with the clamp rule above.
double hellinger_from_affinity(double affinity);

/// V(p, q) = 1/2 int |p - q|.
double total_variation(std::span<const double> p, std::span<const double> q,
                       const QuadratureGrid& grid);

/// h*(p1, p2) = sqrt(1/2 int (sqrt p1 - sqrt p2)^2 sqrt(ref_num / ref_den)).
/// Points with ref_den < 1e-300 contribute 0 when the integrand vanishes
/// there and throw NumericalError otherwise.
double weighted_hellinger(std::span<const double> p1, std::span<const double> p2,
                          std::span<const double> ref_num, std::span<const double> ref_den,
                          const QuadratureGrid& grid);

}  // namespace mixest
