#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mixest {

/// Uniform lattice with composite-Simpson weights. Every integral over x
/// in the library is a dot product with weights().
class QuadratureGrid {
 public:
  static constexpr std::size_t kMinPoints = 257;
  static constexpr std::size_t kDefaultPoints = 4097;

  /// n must be odd and >= 257; lo < hi.
  QuadratureGrid(double lo, double hi, std::size_t n = kDefaultPoints);

  std::size_t size() const { return x_.size(); }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double step() const { return step_; }
  const std::vector<double>& points() const { return x_; }
  const std::vector<double>& weights() const { return w_; }

  double integrate(std::span<const double> f) const;
  /// Composite trapezoid, used to check coverage independently of Simpson.
  double integrate_trapezoid(std::span<const double> f) const;

  bool operator==(const QuadratureGrid& o) const {
    return lo_ == o.lo_ && hi_ == o.hi_ && x_.size() == o.x_.size();
  }

 private:
  double lo_, hi_, step_;
  std::vector<double> x_;
  std::vector<double> w_;
};

}  // namespace mixest
