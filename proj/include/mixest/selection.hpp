#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mixest/error.hpp"
#include "mixest/estimator.hpp"

namespace mixest {

enum class Selector { Algorithm1, Algorithm2, WS };
std::string to_string(Selector s);

/// One decision of the stopping rule: for Algorithm 1 / WS the quantity is
/// h_m - h_{m+1}, for Algorithm 2 it is h_m itself.
struct ThresholdStep {
  std::size_t m = 0;
  double quantity = 0.0;
  double threshold = 0.0;
  bool satisfied = false;
};

struct SelectionResult {
  Selector selector = Selector::Algorithm1;
  std::size_t m_hat = 1;
  bool cap_hit = false;
  MixingMeasure g_hat{{{0.0}}, {1.0}};
  std::vector<FitResult> sweep;  ///< sweep[i] is the fit of order i + 1
  std::vector<ThresholdStep> trace;
  double sigma1 = 0.0;
  double sigma0 = 1.0;

  /// max over the sweep of h_{m+1} - h_m (<= 0 for a monotone sweep).
  double max_monotonicity_violation() const;
};

struct SelectionOptions {
  std::size_t m_max = 10;
  /// Fit every order up to m_max even after the rule has fired.
  bool full_sweep = false;
};

/// Raised when a fit inside the sweep fails; carries the fits made so far.
class SelectionError : public NumericalError {
 public:
  SelectionError(const std::string& what, std::vector<FitResult> partial)
      : NumericalError(what), partial_sweep(std::move(partial)) {}
  std::vector<FitResult> partial_sweep;
};

/// m_hat = inf { m : h(G_m) <= h(G_{m+1}) + C_n n^{-1/2} }.
SelectionResult algorithm1(const Sample& data, const KernelFamily& fam, double sigma1,
                           double sigma0, double cn, const FitConfig& fit,
                           const SelectionOptions& opts = {});

/// m_hat = inf { m : h(G_m) < epsilon }.
SelectionResult algorithm2(const Sample& data, const KernelFamily& fam, double sigma1,
                           double sigma0, double epsilon, const FitConfig& fit,
                           const SelectionOptions& opts = {});

/// Algorithm 1 with the candidate mixture left unsmoothed (sigma1 = 0).
SelectionResult ws_algorithm(const Sample& data, const KernelFamily& fam, double sigma0,
                             double cn_prime, const FitConfig& fit,
                             const SelectionOptions& opts = {});

/// sqrt((d1 + 1) log n / 2).
double bic_cn(std::size_t n, std::size_t d1);

/// ratio_lb * min mass * min separation >= epsilon.
bool epsilon_feasibility(const MixingMeasure& g0, double ratio_lb, double epsilon);

}  // namespace mixest
