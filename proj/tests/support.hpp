#pragma once

#include <random>
#include <vector>

#include "mixest/measures.hpp"

namespace support {

// k atoms in [-2, 2]^d (scale-like coordinates, index >= 1, in [0.2, 3])
// with Dirichlet(1) weights.
inline mixest::MixingMeasure random_measure(std::mt19937_64& rng, std::size_t k, std::size_t d,
                                            bool positive_scale = false) {
  std::uniform_real_distribution<double> loc(-2.0, 2.0), scale(0.2, 3.0);
  std::exponential_distribution<double> e(1.0);
  std::vector<mixest::Atom> atoms(k, mixest::Atom(d));
  std::vector<double> w(k);
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < d; ++j) atoms[i][j] = (positive_scale && j == 1) ? scale(rng) : loc(rng);
    w[i] = e(rng) + 1e-3;
    sum += w[i];
  }
  for (double& v : w) v /= sum;
  return mixest::canonicalize(std::move(atoms), std::move(w));
}

}  // namespace support
