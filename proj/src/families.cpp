#include "mixest/families.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "mixest/error.hpp"

namespace mixest {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;
constexpr double kInvPi = std::numbers::inv_pi;

// Density of the unshifted location-scale kernel at standardized z, with
// derivative with respect to z.
struct StdKernel {
  double value;
  double dz;
};

StdKernel std_gaussian(double z) {
  const double v = kInvSqrt2Pi * std::exp(-0.5 * z * z);
  return {v, -z * v};
}

StdKernel std_cauchy(double z) {
  const double v = kInvPi / (1.0 + z * z);
  return {v, -2.0 * z * v / (1.0 + z * z)};
}

StdKernel std_student(double z, double nu) {
  const double c = std::exp(std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu)) /
                   std::sqrt(nu * std::numbers::pi);
  const double v = c * std::pow(1.0 + z * z / nu, -0.5 * (nu + 1.0));
  return {v, -(nu + 1.0) * z / (nu + z * z) * v};
}

// Loc-scale density (1/tau) k(z) with gradient w.r.t. (eta, tau).
double loc_scale(const StdKernel& k, double z, double tau, double* d_eta, double* d_tau) {
  const double v = k.value / tau;
  if (d_eta) *d_eta = -k.dz / (tau * tau);
  if (d_tau) *d_tau = -(k.value + z * k.dz) / (tau * tau);
  return v;
}

}  // namespace

double normal_pdf(double t) { return kInvSqrt2Pi * std::exp(-0.5 * t * t); }
double normal_cdf(double t) { return 0.5 * std::erfc(-t * std::numbers::sqrt2 * 0.5); }

KernelFamily KernelFamily::gaussian() { return KernelFamily(FamilyKind::GaussianLocScale); }
KernelFamily KernelFamily::cauchy() { return KernelFamily(FamilyKind::CauchyLocScale); }
KernelFamily KernelFamily::skew_normal() { return KernelFamily(FamilyKind::SkewNormal); }

KernelFamily KernelFamily::gaussian_loc(double scale) {
  if (!(scale > 0.0)) throw InputError("fixed scale must be positive");
  KernelFamily f(FamilyKind::GaussianLoc);
  f.fixed_scale_ = scale;
  return f;
}

KernelFamily KernelFamily::cauchy_loc(double scale) {
  if (!(scale > 0.0)) throw InputError("fixed scale must be positive");
  KernelFamily f(FamilyKind::CauchyLoc);
  f.fixed_scale_ = scale;
  return f;
}

KernelFamily KernelFamily::student_t(double dof) {
  if (!(dof > 0.0)) throw InputError("student-t degrees of freedom must be positive");
  KernelFamily f(FamilyKind::StudentT);
  f.dof_ = dof;
  return f;
}

KernelFamily KernelFamily::with_shift(double shift) const {
  if (!(shift >= 0.0) || !std::isfinite(shift)) throw InputError("shift must be finite and >= 0");
  KernelFamily f = *this;
  f.shift_ = shift;
  return f;
}

KernelFamily KernelFamily::parse(std::string_view name) {
  const auto colon = name.find(':');
  const std::string head(name.substr(0, colon));
  double arg = 0.0;
  const bool has_arg = colon != std::string_view::npos;
  if (has_arg) {
    try {
      arg = std::stod(std::string(name.substr(colon + 1)));
    } catch (const std::exception&) {
      throw InputError("bad family parameter in '" + std::string(name) + "'");
    }
  }
  if (head == "gaussian" && !has_arg) return gaussian();
  if (head == "cauchy" && !has_arg) return cauchy();
  if (head == "skewnormal" && !has_arg) return skew_normal();
  if (head == "gaussian-loc") return gaussian_loc(has_arg ? arg : 1.0);
  if (head == "cauchy-loc") return cauchy_loc(has_arg ? arg : 1.0);
  if (head == "student-t" && has_arg) return student_t(arg);
  throw InputError("unknown family '" + std::string(name) + "'");
}

std::size_t KernelFamily::dim() const {
  switch (kind_) {
    case FamilyKind::GaussianLoc:
    case FamilyKind::CauchyLoc:
      return 1;
    case FamilyKind::SkewNormal:
      return 3;
    default:
      return 2;
  }
}

CoordinateRole KernelFamily::role(std::size_t j) const {
  if (j == 0) return CoordinateRole::Location;
  if (j == 1) return CoordinateRole::Scale;
  return CoordinateRole::Shape;
}

bool KernelFamily::heavy_tailed() const {
  return kind_ == FamilyKind::CauchyLocScale || kind_ == FamilyKind::CauchyLoc ||
         kind_ == FamilyKind::StudentT;
}

bool KernelFamily::gaussian_type() const {
  return kind_ == FamilyKind::GaussianLocScale || kind_ == FamilyKind::GaussianLoc;
}

bool KernelFamily::cauchy_type() const {
  return kind_ == FamilyKind::CauchyLocScale || kind_ == FamilyKind::CauchyLoc;
}

std::string KernelFamily::name() const {
  std::string s;
  switch (kind_) {
    case FamilyKind::GaussianLocScale: s = "gaussian"; break;
    case FamilyKind::CauchyLocScale: s = "cauchy"; break;
    case FamilyKind::GaussianLoc: s = "gaussian-loc:" + std::to_string(fixed_scale_); break;
    case FamilyKind::CauchyLoc: s = "cauchy-loc:" + std::to_string(fixed_scale_); break;
    case FamilyKind::SkewNormal: s = "skewnormal"; break;
    case FamilyKind::StudentT: s = "student-t:" + std::to_string(dof_); break;
  }
  if (shift_ > 0.0) s += "+shift:" + std::to_string(shift_);
  return s;
}

void KernelFamily::validate(std::span<const double> theta) const {
  if (theta.size() != dim())
    throw InputError("family " + name() + " expects " + std::to_string(dim()) + " parameters");
  for (double v : theta)
    if (!std::isfinite(v)) throw InputError("non-finite parameter");
  if (dim() >= 2 && !(theta[1] > 0.0)) throw InputError("scale parameter must be positive");
}

double KernelFamily::scale(std::span<const double> theta) const {
  return dim() >= 2 ? theta[1] : fixed_scale_;
}

double KernelFamily::base_density(std::span<const double> theta, double x,
                                  std::span<double> grad) const {
  const bool want = !grad.empty();
  const double eta = theta[0];
  switch (kind_) {
    case FamilyKind::GaussianLocScale:
    case FamilyKind::CauchyLocScale:
    case FamilyKind::StudentT: {
      const double tau = theta[1];
      const double z = (x - eta) / tau;
      const StdKernel k = kind_ == FamilyKind::GaussianLocScale ? std_gaussian(z)
                          : kind_ == FamilyKind::CauchyLocScale ? std_cauchy(z)
                                                                : std_student(z, dof_);
      return loc_scale(k, z, tau, want ? &grad[0] : nullptr, want ? &grad[1] : nullptr);
    }
    case FamilyKind::GaussianLoc:
    case FamilyKind::CauchyLoc: {
      const double tau = fixed_scale_;
      const double z = (x - eta) / tau;
      const StdKernel k = kind_ == FamilyKind::GaussianLoc ? std_gaussian(z) : std_cauchy(z);
      return loc_scale(k, z, tau, want ? &grad[0] : nullptr, nullptr);
    }
    case FamilyKind::SkewNormal: {
      const double tau = theta[1], m = theta[2];
      const double z = (x - eta) / tau;
      const double phi = normal_pdf(z);
      const double cdf = normal_cdf(m * z);
      const double v = 2.0 / tau * phi * cdf;
      if (want) {
        const double pm = normal_pdf(m * z);
        // d/dz of (2/tau) phi(z) Phi(mz)
        const double dz = 2.0 / tau * (-z * phi * cdf + phi * m * pm);
        grad[0] = -dz / tau;
        grad[1] = -v / tau - z / tau * dz;
        grad[2] = 2.0 / tau * phi * pm * z;
      }
      return v;
    }
  }
  return 0.0;
}

double KernelFamily::density_grad(std::span<const double> theta, double x,
                                  std::span<double> grad) const {
  if (shift_ == 0.0) return base_density(theta, x, grad);
  double g2[3] = {0.0, 0.0, 0.0};
  std::span<double> other = grad.empty() ? std::span<double>() : std::span<double>(g2, grad.size());
  const double a = base_density(theta, x - shift_, grad);
  const double b = base_density(theta, x + shift_, other);
  for (std::size_t j = 0; j < grad.size(); ++j) grad[j] = 0.5 * (grad[j] + other[j]);
  return 0.5 * (a + b);
}

double KernelFamily::density(std::span<const double> theta, double x) const {
  validate(theta);
  return density_grad(theta, x, {});
}

double KernelFamily::draw(std::span<const double> theta, Rng& rng) const {
  double x = 0.0;
  const double eta = theta[0];
  switch (kind_) {
    case FamilyKind::GaussianLocScale:
      x = std::normal_distribution<double>(eta, theta[1])(rng);
      break;
    case FamilyKind::GaussianLoc:
      x = std::normal_distribution<double>(eta, fixed_scale_)(rng);
      break;
    case FamilyKind::CauchyLocScale:
      x = std::cauchy_distribution<double>(eta, theta[1])(rng);
      break;
    case FamilyKind::CauchyLoc:
      x = std::cauchy_distribution<double>(eta, fixed_scale_)(rng);
      break;
    case FamilyKind::StudentT:
      x = eta + theta[1] * std::student_t_distribution<double>(dof_)(rng);
      break;
    case FamilyKind::SkewNormal: {
      const double m = theta[2];
      const double delta = m / std::sqrt(1.0 + m * m);
      std::normal_distribution<double> n01;
      const double u0 = n01(rng);
      const double u1 = n01(rng);
      x = eta + theta[1] * (delta * std::abs(u0) + std::sqrt(1.0 - delta * delta) * u1);
      break;
    }
  }
  if (shift_ > 0.0) x += std::bernoulli_distribution(0.5)(rng) ? shift_ : -shift_;
  return x;
}

double SmoothingKernel::density(double y) const {
  const double z = y / bandwidth;
  if (tag == KernelTag::Gaussian) return normal_pdf(z) / bandwidth;
  return kInvPi / (bandwidth * (1.0 + z * z));
}

double SmoothingKernel::draw(Rng& rng) const {
  if (identity()) return 0.0;
  if (tag == KernelTag::Gaussian) return std::normal_distribution<double>(0.0, bandwidth)(rng);
  return std::cauchy_distribution<double>(0.0, bandwidth)(rng);
}

std::string SmoothingKernel::name() const {
  return (tag == KernelTag::Gaussian ? "gaussian:" : "cauchy:") + std::to_string(bandwidth);
}

KernelTag SmoothingKernel::parse_tag(std::string_view name) {
  if (name == "gaussian") return KernelTag::Gaussian;
  if (name == "cauchy") return KernelTag::Cauchy;
  throw InputError("unknown smoothing kernel '" + std::string(name) + "'");
}

}  // namespace mixest
