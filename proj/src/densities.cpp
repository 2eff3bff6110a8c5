#include "mixest/densities.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>

#include "fft_convolution.hpp"
#include "mixest/error.hpp"

namespace mixest {

struct SmoothedFamily::Cache {
  static constexpr std::size_t kMaxEntries = 256;
  std::mutex mutex;
  std::map<std::vector<double>, std::shared_ptr<const std::vector<double>>> entries;
};

SmoothedFamily::SmoothedFamily(KernelFamily base, SmoothingKernel kernel, Mode mode)
    : base_(std::move(base)), kernel_(kernel), mode_(mode) {}

SmoothedFamily convolve(const KernelFamily& fam, const SmoothingKernel& smooth,
                        const QuadratureGrid* grid) {
  if (!(smooth.bandwidth >= 0.0) || !std::isfinite(smooth.bandwidth))
    throw InputError("smoothing bandwidth must be finite and >= 0");
  using Mode = SmoothedFamily::Mode;
  if (smooth.identity()) return SmoothedFamily(fam, smooth, Mode::Identity);
  if (fam.gaussian_type() && smooth.tag == KernelTag::Gaussian)
    return SmoothedFamily(fam, smooth, Mode::GaussianClosed);
  if (fam.cauchy_type() && smooth.tag == KernelTag::Cauchy)
    return SmoothedFamily(fam, smooth, Mode::CauchyClosed);
  if (grid == nullptr)
    throw InputError("no closed-form convolution for " + fam.name() + " * " + smooth.name() +
                     " and numerical fallback is disabled (no grid)");
  SmoothedFamily out(fam, smooth, Mode::Numeric);
  out.grid_ = *grid;
  out.conv_ = std::make_shared<const FftConvolver>(grid->size(), grid->step(), smooth);
  out.cache_ = std::make_shared<SmoothedFamily::Cache>();
  return out;
}

KernelFamily SmoothedFamily::effective_base() const {
  const double s = kernel_.bandwidth;
  switch (base_.kind()) {
    case FamilyKind::GaussianLoc:
      return KernelFamily::gaussian_loc(std::hypot(base_.fixed_scale(), s)).with_shift(base_.shift());
    case FamilyKind::CauchyLoc:
      return KernelFamily::cauchy_loc(base_.fixed_scale() + s).with_shift(base_.shift());
    default:
      return base_;
  }
}

namespace {

// Scale of the closed-form convolution and d(scale)/d(tau).
std::pair<double, double> closed_scale(SmoothedFamily::Mode mode, double tau, double sigma) {
  if (mode == SmoothedFamily::Mode::GaussianClosed) {
    const double s = std::hypot(tau, sigma);
    return {s, tau / s};
  }
  return {tau + sigma, 1.0};
}

}  // namespace

void SmoothedFamily::evaluate(std::span<const double> theta, const QuadratureGrid& grid,
                              std::span<double> values, std::span<double> grads,
                              kernels::Exec exec) const {
  const auto& x = grid.points();
  const std::size_t n = x.size();
  switch (mode_) {
    case Mode::Identity:
      kernels::family(base_, theta, x, values, grads, exec);
      return;
    case Mode::GaussianClosed:
    case Mode::CauchyClosed: {
      const KernelFamily eff = effective_base();
      if (base_.dim() == 1) {
        kernels::family(eff, theta, x, values, grads, exec);
        return;
      }
      std::vector<double> t(theta.begin(), theta.end());
      const auto [s, ds] = closed_scale(mode_, theta[1], kernel_.bandwidth);
      t[1] = s;
      kernels::family(eff, t, x, values, grads, exec);
      if (!grads.empty())
        for (std::size_t j = 0; j < n; ++j) grads[n + j] *= ds;
      return;
    }
    case Mode::Numeric: {
      if (!(grid == *grid_)) throw InputError("numeric convolution evaluated on a foreign grid");
      std::vector<double> raw(n);
      std::vector<double> raw_grads(grads.empty() ? 0 : base_.dim() * n);
      kernels::family(base_, theta, x, raw, raw_grads, exec);
      conv_->apply(raw, values, true);
      for (std::size_t k = 0; k < (grads.empty() ? 0 : base_.dim()); ++k)
        conv_->apply(std::span<const double>(raw_grads).subspan(k * n, n), grads.subspan(k * n, n),
                     false);
      return;
    }
  }
}

double SmoothedFamily::density(std::span<const double> theta, double x) const {
  base_.validate(theta);
  if (mode_ == Mode::Identity) return base_.density_grad(theta, x, {});
  if (mode_ != Mode::Numeric) {
    if (base_.dim() == 1) return effective_base().density_grad(theta, x, {});
    std::vector<double> t(theta.begin(), theta.end());
    t[1] = closed_scale(mode_, theta[1], kernel_.bandwidth).first;
    return base_.density_grad(t, x, {});
  }

  std::shared_ptr<const std::vector<double>> curve;
  const std::vector<double> key(theta.begin(), theta.end());
  {
    std::lock_guard lock(cache_->mutex);
    auto it = cache_->entries.find(key);
    if (it != cache_->entries.end()) curve = it->second;
  }
  if (!curve) {
    auto fresh = std::make_shared<std::vector<double>>(grid_->size());
    evaluate(theta, *grid_, *fresh, {}, kernels::Exec::Serial);
    std::lock_guard lock(cache_->mutex);
    if (cache_->entries.size() >= Cache::kMaxEntries) cache_->entries.clear();
    curve = cache_->entries.emplace(key, std::move(fresh)).first->second;
  }

  // Cubic Lagrange interpolation on the uniform grid.
  const auto& v = *curve;
  const double u = (x - grid_->lo()) / grid_->step();
  if (u < 0.0 || u > static_cast<double>(v.size() - 1)) return 0.0;
  const auto last = static_cast<std::ptrdiff_t>(v.size()) - 1;
  const std::ptrdiff_t i1 = std::clamp(static_cast<std::ptrdiff_t>(std::floor(u)), std::ptrdiff_t{1}, last - 2);
  const double t = u - static_cast<double>(i1);
  const double y0 = v[i1 - 1], y1 = v[i1], y2 = v[i1 + 1], y3 = v[i1 + 2];
  const double r = -t * (t - 1) * (t - 2) / 6 * y0 + (t + 1) * (t - 1) * (t - 2) / 2 * y1 -
                   (t + 1) * t * (t - 2) / 2 * y2 + (t + 1) * t * (t - 1) / 6 * y3;
  return std::max(0.0, r);
}

double SmoothedFamily::draw(std::span<const double> theta, Rng& rng) const {
  if (mode_ == Mode::Numeric)
    throw InputError("numerically convolved family " + base_.name() + " has no sampler");
  const double x = base_.draw(theta, rng);
  return mode_ == Mode::Identity ? x : x + kernel_.draw(rng);
}

double eval_density(const KernelFamily& fam, std::span<const double> theta, double x) {
  return fam.density(theta, x);
}

std::vector<double> mixture_density(const MixingMeasure& g, const SmoothedFamily& fam,
                                    const QuadratureGrid& grid, const ParameterBox* box) {
  const std::size_t n = grid.size();
  std::vector<double> comps(g.size() * n);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (box && !box->contains(g.atom(i), 1e-12))
      throw InputError("mixture atom " + std::to_string(i) + " lies outside the parameter box");
    fam.base().validate(g.atom(i));
    fam.evaluate(g.atom(i), grid, std::span<double>(comps).subspan(i * n, n), {});
  }
  std::vector<double> out(n);
  kernels::mixture(g.weights(), comps, out, kernels::Exec::Parallel);
  return out;
}

std::vector<double> mixture_density(const MixingMeasure& g, const KernelFamily& fam,
                                    const QuadratureGrid& grid, const ParameterBox* box) {
  return mixture_density(g, convolve(fam, SmoothingKernel{}), grid, box);
}

std::vector<double> smoothed_empirical(const Sample& data, const SmoothingKernel& smooth,
                                       const QuadratureGrid& grid) {
  if (data.values.empty()) throw InputError("empty sample");
  if (!(smooth.bandwidth > 0.0)) throw InputError("sigma0 must be positive");
  std::vector<double> out(grid.size());
  kernels::kde(data.values, smooth, grid.points(), out, kernels::Exec::Parallel);
  return out;
}

namespace {

template <class Drawer>
Sample sample_impl(const MixingMeasure& g, std::size_t n, std::uint64_t seed, Drawer&& draw) {
  if (n == 0) throw InputError("sample size must be >= 1");
  Rng rng(seed);
  std::discrete_distribution<std::size_t> pick(g.weights().begin(), g.weights().end());
  Sample out;
  out.seed = seed;
  out.values.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = pick(rng);
    out.values.push_back(draw(g.atom(c), rng));
  }
  return out;
}

}  // namespace

Sample sample(const MixingMeasure& g, const KernelFamily& fam, std::size_t n, std::uint64_t seed) {
  for (const auto& a : g.atoms()) fam.validate(a);
  return sample_impl(g, n, seed, [&](const Atom& a, Rng& rng) { return fam.draw(a, rng); });
}

Sample sample(const MixingMeasure& g, const SmoothedFamily& fam, std::size_t n,
              std::uint64_t seed) {
  if (!fam.samplable())
    throw InputError("numerically convolved family " + fam.base().name() + " has no sampler");
  for (const auto& a : g.atoms()) fam.base().validate(a);
  return sample_impl(g, n, seed, [&](const Atom& a, Rng& rng) { return fam.draw(a, rng); });
}

double quantile(std::vector<double> x, double q) {
  if (x.empty()) throw InputError("quantile of empty data");
  std::sort(x.begin(), x.end());
  const double pos = q * static_cast<double>(x.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, x.size() - 1);
  return x[lo] + (pos - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

double sample_sd(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

double robust_scale(std::span<const double> x) {
  const double sd = sample_sd(x);
  std::vector<double> v(x.begin(), x.end());
  const double iqr = quantile(v, 0.75) - quantile(v, 0.25);
  const double r = iqr / 1.349;
  return r > 0.0 ? std::min(sd, r) : sd;
}

QuadratureGrid build_grid(const Sample& data, std::span<const KernelFamily> fams, double sigma_max,
                          const GridPolicy& policy) {
  if (data.values.empty()) throw InputError("cannot build a grid for empty data");
  bool heavy = policy.heavy_tail;
  double fixed = 0.0;
  for (const auto& f : fams) {
    heavy = heavy || f.heavy_tailed();
    if (f.dim() == 1) fixed = std::max(fixed, f.fixed_scale());
    fixed = std::max(fixed, f.shift());
  }
  double lo, hi;
  if (heavy) {
    lo = quantile(data.values, 0.001);
    hi = quantile(data.values, 0.999);
  } else {
    const auto [mn, mx] = std::minmax_element(data.values.begin(), data.values.end());
    lo = *mn;
    hi = *mx;
  }
  if (hi - lo <= 0.0) {
    lo -= 1.0;
    hi += 1.0;
  }
  double scale = policy.scale_max;
  if (std::isnan(scale)) scale = std::max(robust_scale(data.values), fixed);
  const double pad = 6.0 * (scale + sigma_max);
  // A few far outliers can stretch the extent past what the requested point
  // count resolves; refine until the step is below (scale + sigma_max) / 4.
  const double width = hi - lo + 2.0 * pad;
  const double max_step = (scale + sigma_max) / 4.0;
  std::size_t points = policy.points;
  while (width / static_cast<double>(points - 1) > max_step && points < GridPolicy::kMaxPoints)
    points = 2 * (points - 1) + 1;
  return QuadratureGrid(lo - pad, hi + pad, points);
}

}  // namespace mixest
