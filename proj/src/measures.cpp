#include "mixest/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "mixest/error.hpp"

namespace mixest {

ParameterBox::ParameterBox(std::vector<double> lower, std::vector<double> upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.empty()) throw InputError("parameter box must have dimension >= 1");
  if (lower_.size() != upper_.size()) throw InputError("parameter box bounds differ in length");
  for (std::size_t j = 0; j < lower_.size(); ++j) {
    if (!(lower_[j] < upper_[j]))
      throw InputError("parameter box needs lower < upper in coordinate " + std::to_string(j));
  }
}

bool ParameterBox::contains(std::span<const double> theta, double tol) const {
  if (theta.size() != dim()) return false;
  for (std::size_t j = 0; j < dim(); ++j) {
    if (theta[j] < lower_[j] - tol || theta[j] > upper_[j] + tol) return false;
  }
  return true;
}

Atom ParameterBox::clamp(std::span<const double> theta) const {
  Atom out(theta.begin(), theta.end());
  for (std::size_t j = 0; j < dim(); ++j) out[j] = std::clamp(out[j], lower_[j], upper_[j]);
  return out;
}

namespace {

void check_shape(const std::vector<Atom>& atoms, const std::vector<double>& weights) {
  if (atoms.empty()) throw InputError("mixing measure needs at least one atom");
  if (atoms.size() != weights.size()) throw InputError("atoms and weights differ in length");
  const std::size_t d = atoms.front().size();
  if (d == 0) throw InputError("atoms must have dimension >= 1");
  for (const auto& a : atoms) {
    if (a.size() != d) throw InputError("atoms have inconsistent dimensions");
    for (double v : a)
      if (!std::isfinite(v)) throw InputError("atom coordinate is not finite");
  }
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) throw InputError("weights must be finite and nonnegative");
  }
}

}  // namespace

MixingMeasure::MixingMeasure(std::vector<Atom> atoms, std::vector<double> weights)
    : atoms_(std::move(atoms)), weights_(std::move(weights)) {
  check_shape(atoms_, weights_);
  const double total = std::accumulate(weights_.begin(), weights_.end(), 0.0);
  if (std::abs(total - 1.0) > kWeightSumTol)
    throw InputError("weights must sum to 1 (got " + std::to_string(total) + ")");
}

bool MixingMeasure::inside(const ParameterBox& box, double tol) const {
  return std::all_of(atoms_.begin(), atoms_.end(),
                     [&](const Atom& a) { return box.contains(a, tol); });
}

double atom_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
  return std::sqrt(s);
}

MixingMeasure canonicalize(std::vector<Atom> atoms, std::vector<double> weights) {
  check_shape(atoms, weights);
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (total <= 0.0) throw InputError("all weights are zero");
  if (std::abs(total - 1.0) > 1e-6)
    throw InputError("weights must sum to 1 within 1e-6 (got " + std::to_string(total) + ")");

  std::vector<std::size_t> order(atoms.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return atoms[a] < atoms[b]; });

  // Greedy merge in sorted order; each atom joins the first kept atom within tolerance.
  std::vector<Atom> kept;
  std::vector<double> mass;
  for (std::size_t idx : order) {
    if (weights[idx] <= 0.0) continue;
    bool merged = false;
    for (std::size_t k = 0; k < kept.size(); ++k) {
      if (atom_distance(kept[k], atoms[idx]) < MixingMeasure::kMergeTol) {
        mass[k] += weights[idx];
        merged = true;
        break;
      }
    }
    if (!merged) {
      kept.push_back(std::move(atoms[idx]));
      mass.push_back(weights[idx]);
    }
  }

  // Already-normalized input is left bit-for-bit alone so canonicalize is idempotent.
  const double sum = std::accumulate(mass.begin(), mass.end(), 0.0);
  if (std::abs(sum - 1.0) > 1e-14)
    for (double& w : mass) w /= sum;
  return MixingMeasure(std::move(kept), std::move(mass));
}

MixingMeasure canonicalize(const MixingMeasure& g) { return canonicalize(g.atoms(), g.weights()); }

WassersteinResult wasserstein_with_coupling(const MixingMeasure& g1, const MixingMeasure& g2,
                                            int r) {
  if (r < 1) throw InputError("Wasserstein order r must be >= 1");
  if (g1.dim() != g2.dim()) throw InputError("measures live in different dimensions");
  const std::size_t k1 = g1.size(), k2 = g2.size();
  std::vector<double> cost(k1 * k2);
  for (std::size_t i = 0; i < k1; ++i)
    for (std::size_t j = 0; j < k2; ++j)
      cost[i * k2 + j] = std::pow(atom_distance(g1.atom(i), g2.atom(j)), r);

  WassersteinResult out;
  double total = 0.0;
  if (k1 == 1 || k2 == 1) {
    out.coupling = Coupling(k1, k2);
    for (std::size_t i = 0; i < k1; ++i) {
      for (std::size_t j = 0; j < k2; ++j) {
        const double q = (k1 == 1) ? g2.weight(j) : g1.weight(i);
        out.coupling(i, j) = q;
        total += q * cost[i * k2 + j];
      }
    }
  } else {
    TransportSolution sol = solve_transport(g1.weights(), g2.weights(), cost);
    out.coupling = std::move(sol.plan);
    total = sol.cost;
  }
  out.value = std::pow(std::max(0.0, total), 1.0 / r);
  return out;
}

double wasserstein(const MixingMeasure& g1, const MixingMeasure& g2, int r) {
  return wasserstein_with_coupling(g1, g2, r).value;
}

std::pair<double, double> min_mass_separation(const MixingMeasure& g) {
  const double mass = *std::min_element(g.weights().begin(), g.weights().end());
  double sep = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = i + 1; j < g.size(); ++j) sep = std::min(sep, atom_distance(g.atom(i), g.atom(j)));
  return {mass, sep};
}

}  // namespace mixest
