#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "mixest/transport.hpp"

namespace mixest {

using Atom = std::vector<double>;

/// Axis-aligned compact box holding the parameter space.
class ParameterBox {
 public:
  ParameterBox(std::vector<double> lower, std::vector<double> upper);

  std::size_t dim() const { return lower_.size(); }
  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }

  bool contains(std::span<const double> theta, double tol = 0.0) const;
  Atom clamp(std::span<const double> theta) const;

 private:
  std::vector<double> lower_;
  std::vector<double> upper_;
};

/// Weighted discrete measure sum_i p_i delta_{theta_i}.
///
/// Construction validates shape, finiteness, nonnegativity and that the
/// weights sum to one within 1e-12. Use canonicalize() to normalize
/// looser input.
class MixingMeasure {
 public:
  static constexpr double kWeightSumTol = 1e-12;
  static constexpr double kMergeTol = 1e-10;

  MixingMeasure(std::vector<Atom> atoms, std::vector<double> weights);

  std::size_t size() const { return weights_.size(); }
  std::size_t dim() const { return atoms_.front().size(); }
  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::vector<double>& weights() const { return weights_; }
  const Atom& atom(std::size_t i) const { return atoms_[i]; }
  double weight(std::size_t i) const { return weights_[i]; }

  bool inside(const ParameterBox& box, double tol = 1e-12) const;

  friend bool operator==(const MixingMeasure&, const MixingMeasure&) = default;

 private:
  std::vector<Atom> atoms_;
  std::vector<double> weights_;
};

/// Merge atoms closer than 1e-10 (l2), drop zero weights, renormalize and
/// sort atoms lexicographically. Weights must sum to 1 within 1e-6.
MixingMeasure canonicalize(std::vector<Atom> atoms, std::vector<double> weights);
MixingMeasure canonicalize(const MixingMeasure& g);

double atom_distance(std::span<const double> a, std::span<const double> b);

struct WassersteinResult {
  double value = 0.0;
  Coupling coupling;
};

/// Exact W_r between two mixing measures with l2 ground metric on atoms.
WassersteinResult wasserstein_with_coupling(const MixingMeasure& g1, const MixingMeasure& g2,
                                            int r);
double wasserstein(const MixingMeasure& g1, const MixingMeasure& g2, int r);

/// (smallest weight, smallest pairwise atom distance); separation is +inf for k = 1.
std::pair<double, double> min_mass_separation(const MixingMeasure& g);

}  // namespace mixest
