#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>

#include "mixest/rng.hpp"

namespace mixest {

enum class FamilyKind { GaussianLocScale, CauchyLocScale, GaussianLoc, CauchyLoc, SkewNormal, StudentT };
enum class CoordinateRole { Location, Scale, Shape };

/// Parametric component density f(x | theta) on the real line.
///
/// Parameter layouts: loc-scale families use (eta, tau) with tau the scale
/// (standard deviation for the normal), loc-only families use (eta) with a
/// fixed scale, the skew normal uses (eta, tau, m). A nonzero shift turns
/// the family into 1/2 f(x - shift | theta) + 1/2 f(x + shift | theta).
class KernelFamily {
 public:
  static KernelFamily gaussian();
  static KernelFamily cauchy();
  static KernelFamily gaussian_loc(double scale = 1.0);
  static KernelFamily cauchy_loc(double scale = 1.0);
  static KernelFamily skew_normal();
  static KernelFamily student_t(double dof);

  /// Names: gaussian, cauchy, gaussian-loc[:s], cauchy-loc[:s], skewnormal, student-t:nu.
  static KernelFamily parse(std::string_view name);

  KernelFamily with_shift(double shift) const;

  FamilyKind kind() const { return kind_; }
  std::size_t dim() const;
  CoordinateRole role(std::size_t j) const;
  double fixed_scale() const { return fixed_scale_; }
  double dof() const { return dof_; }
  double shift() const { return shift_; }
  bool heavy_tailed() const;
  bool gaussian_type() const;
  bool cauchy_type() const;
  std::string name() const;

  /// Throws InputError for a wrong-sized theta or a nonpositive scale.
  void validate(std::span<const double> theta) const;

  double density(std::span<const double> theta, double x) const;
  /// Density and d/dtheta at x; `grad` must have dim() entries. No validation.
  double density_grad(std::span<const double> theta, double x, std::span<double> grad) const;
  /// Component scale used for grid extents and start perturbations.
  double scale(std::span<const double> theta) const;
  double draw(std::span<const double> theta, Rng& rng) const;

  friend bool operator==(const KernelFamily&, const KernelFamily&) = default;

 private:
  explicit KernelFamily(FamilyKind kind) : kind_(kind) {}
  double base_density(std::span<const double> theta, double x, std::span<double> grad) const;

  FamilyKind kind_;
  double fixed_scale_ = 1.0;
  double dof_ = 0.0;
  double shift_ = 0.0;
};

enum class KernelTag { Gaussian, Cauchy };

/// K_sigma(y) = K(y / sigma) / sigma; sigma = 0 is the identity (no smoothing).
struct SmoothingKernel {
  KernelTag tag = KernelTag::Gaussian;
  double bandwidth = 0.0;

  bool identity() const { return bandwidth == 0.0; }
  double density(double y) const;
  double draw(Rng& rng) const;
  std::string name() const;

  static KernelTag parse_tag(std::string_view name);

  friend bool operator==(const SmoothingKernel&, const SmoothingKernel&) = default;
};

/// Standard normal CDF via erfc.
double normal_cdf(double t);
double normal_pdf(double t);

}  // namespace mixest
