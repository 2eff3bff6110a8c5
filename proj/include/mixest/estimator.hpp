#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mixest/densities.hpp"
#include "mixest/measures.hpp"

namespace mixest {

struct FitConfig {
  std::size_t max_components = 1;  ///< m: fitted measures have at most m atoms
  double sigma1 = 0.0;             ///< bandwidth applied to the candidate mixture
  double sigma0 = 1.0;             ///< bandwidth of the kernel density estimate
  KernelTag kernel = KernelTag::Gaussian;
  std::optional<ParameterBox> box;  ///< defaults to default_box()
  std::size_t starts = 20;
  std::size_t max_iters = 500;
  double tol = 1e-8;  ///< convergence threshold on the affinity change per iteration
  double weight_floor = 1e-6;
  std::uint64_t seed = 0;
  GridPolicy grid;

  void validate() const;
};

struct FitResult {
  MixingMeasure g_hat{{{0.0}}, {1.0}};
  std::size_t order = 0;  ///< the m this fit was computed for
  double h_value = 1.0;
  double affinity = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  std::size_t winning_start = 0;  ///< index into the start list; starts + i for extra starts
  std::vector<double> trace;      ///< affinity after each accepted iteration of the winner
};

/// Everything about a fit that depends on the data but not on m: grid,
/// smoothed candidate family, KDE and parameter box.
class FitProblem {
 public:
  FitProblem(Sample data, const KernelFamily& fam, const FitConfig& cfg);

  const Sample& data() const { return data_; }
  const KernelFamily& family() const { return fam_; }
  const SmoothedFamily& smoothed() const { return smoothed_; }
  const FitConfig& config() const { return cfg_; }
  const QuadratureGrid& grid() const { return grid_; }
  const ParameterBox& box() const { return box_; }
  const std::vector<double>& kde() const { return kde_; }
  const std::vector<double>& sqrt_kde() const { return sqrt_kde_; }
  double data_scale() const { return data_scale_; }

 private:
  Sample data_;
  KernelFamily fam_;
  FitConfig cfg_;
  QuadratureGrid grid_;
  SmoothedFamily smoothed_;
  ParameterBox box_;
  std::vector<double> kde_;
  std::vector<double> sqrt_kde_;
  double data_scale_;
};

/// Affinity A = int sqrt(p_{G,f} * K_sigma1) sqrt(P_n * K_sigma0) and its
/// partial derivatives; atom gradients are row-major k x d.
struct AffinityEval {
  double affinity = 0.0;
  std::vector<double> grad_atoms;
  std::vector<double> grad_weights;
};
AffinityEval evaluate_affinity(const FitProblem& problem, std::span<const double> weights,
                               std::span<const double> atoms, bool with_gradient);

struct ObjectiveValue {
  double h = 1.0;
  double affinity = 0.0;
};
ObjectiveValue objective(const MixingMeasure& g, const FitProblem& problem);
ObjectiveValue objective(const MixingMeasure& g, const Sample& data, const KernelFamily& fam,
                         const FitConfig& cfg);

/// Locations in [q_0.005 - 1, q_0.995 + 1]; scales in [0.01 s, 10 s] with
/// s the robust data scale, floored at 4 grid steps when sigma1 is below
/// that or when the family is convolved numerically (its raw density is
/// sampled on the grid); skewness in [-20, 20].
ParameterBox default_box(const Sample& data, const KernelFamily& fam, const QuadratureGrid& grid,
                         double sigma1, bool numeric_convolution = false);

/// Exactly `starts` candidate measures with m atoms and uniform weights:
/// start 0 spreads atoms over data quantiles, odd starts use k-means seeding,
/// the rest are uniform in the box (log-uniform on scale coordinates).
std::vector<MixingMeasure> initial_starts(const Sample& data, const KernelFamily& fam,
                                          std::size_t m, const ParameterBox& box,
                                          std::size_t starts, std::uint64_t seed);

/// Split the heaviest atom of `prev` into two half-weight atoms displaced
/// by +-0.5 * (its scale, or data_scale / 10 for location-only families).
MixingMeasure warm_start_split(const FitResult& prev, const KernelFamily& fam, double data_scale,
                               const ParameterBox& box);

/// Best-of-starts local minimizer of h(p_{G,f} * K_sigma1, P_n * K_sigma0)
/// over measures with at most m atoms. `extra_starts` join the start list;
/// if `previous` (a fit of lower order on the same problem) beats every
/// start it is returned, which keeps h non-increasing across an m-sweep.
FitResult fit_fixed_order(const FitProblem& problem, std::size_t m,
                          const std::vector<MixingMeasure>& extra_starts = {},
                          const FitResult* previous = nullptr);
FitResult fit_fixed_order(const Sample& data, const KernelFamily& fam, const FitConfig& cfg);

}  // namespace mixest
