#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mixest/families.hpp"
#include "mixest/grid.hpp"
#include "mixest/kernels.hpp"
#include "mixest/measures.hpp"

namespace mixest {

class FftConvolver;

/// i.i.d. observations together with the seed that produced them (0 for files).
struct Sample {
  std::vector<double> values;
  std::uint64_t seed = 0;

  std::size_t size() const { return values.size(); }
};

/// The family f * K_sigma. Closed forms are used for gaussian*gaussian
/// (scale sqrt(tau^2 + sigma^2)) and cauchy*cauchy (scale tau + sigma);
/// everything else is convolved numerically by FFT on a bound grid.
class SmoothedFamily {
 public:
  enum class Mode { Identity, GaussianClosed, CauchyClosed, Numeric };

  const KernelFamily& base() const { return base_; }
  const SmoothingKernel& kernel() const { return kernel_; }
  Mode mode() const { return mode_; }
  std::size_t dim() const { return base_.dim(); }
  bool samplable() const { return mode_ != Mode::Numeric; }

  /// Pointwise value. Numeric families interpolate a per-theta cached grid
  /// convolution (zero outside the bound grid).
  double density(std::span<const double> theta, double x) const;

  /// Values (and, if grads is nonempty, d/dtheta laid out as dim() rows of
  /// grid.size()) on every grid point. Numeric mode requires the bound grid.
  void evaluate(std::span<const double> theta, const QuadratureGrid& grid, std::span<double> values,
                std::span<double> grads, kernels::Exec exec = kernels::Exec::Parallel) const;

  double draw(std::span<const double> theta, Rng& rng) const;

 private:
  friend SmoothedFamily convolve(const KernelFamily&, const SmoothingKernel&,
                                 const QuadratureGrid*);
  struct Cache;

  SmoothedFamily(KernelFamily base, SmoothingKernel kernel, Mode mode);
  KernelFamily effective_base() const;

  KernelFamily base_;
  SmoothingKernel kernel_;
  Mode mode_;
  std::optional<QuadratureGrid> grid_;
  std::shared_ptr<const FftConvolver> conv_;
  std::shared_ptr<Cache> cache_;
};

/// Build f * K_sigma. Pairs without a closed form need `grid` for the
/// numerical fallback; passing nullptr for such a pair throws.
SmoothedFamily convolve(const KernelFamily& fam, const SmoothingKernel& smooth,
                        const QuadratureGrid* grid = nullptr);

double eval_density(const KernelFamily& fam, std::span<const double> theta, double x);

/// [sum_i p_i (f*K)(x_j | theta_i)]_j. Throws if an atom leaves `box`.
std::vector<double> mixture_density(const MixingMeasure& g, const SmoothedFamily& fam,
                                    const QuadratureGrid& grid,
                                    const ParameterBox* box = nullptr);
std::vector<double> mixture_density(const MixingMeasure& g, const KernelFamily& fam,
                                    const QuadratureGrid& grid,
                                    const ParameterBox* box = nullptr);

/// Fixed-bandwidth kernel density estimate P_n * K_sigma0 on the grid.
std::vector<double> smoothed_empirical(const Sample& data, const SmoothingKernel& smooth,
                                       const QuadratureGrid& grid);

/// n draws from p_{G,f}; deterministic in `seed`.
Sample sample(const MixingMeasure& g, const KernelFamily& fam, std::size_t n, std::uint64_t seed);
Sample sample(const MixingMeasure& g, const SmoothedFamily& fam, std::size_t n, std::uint64_t seed);

struct GridPolicy {
  std::size_t points = QuadratureGrid::kDefaultPoints;
  /// Largest component scale to cover; NaN means "use the robust data scale".
  double scale_max = std::numeric_limits<double>::quiet_NaN();
  /// Force quantile clipping of the extent (otherwise decided by the families).
  bool heavy_tail = false;
  /// Ceiling for the automatic refinement below.
  static constexpr std::size_t kMaxPoints = 65537;
};

/// Uniform grid over [a - 6 (scale_max + sigma_max), b + 6 (scale_max + sigma_max)]
/// where [a, b] is the data range, or the 0.001/0.999 quantiles when any
/// family is heavy tailed. The point count starts at policy.points and is
/// doubled while the step exceeds (scale_max + sigma_max) / 4.
QuadratureGrid build_grid(const Sample& data, std::span<const KernelFamily> fams, double sigma_max,
                          const GridPolicy& policy = {});

/// Sample standard deviation and min(sd, IQR / 1.349).
double sample_sd(std::span<const double> x);
double robust_scale(std::span<const double> x);
/// Linear-interpolated empirical quantile (type 7).
double quantile(std::vector<double> x, double q);

}  // namespace mixest
