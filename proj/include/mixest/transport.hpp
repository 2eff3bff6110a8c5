#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mixest {

/// Dense row-major transport plan between a k-point and a k'-point measure.
class Coupling {
 public:
  Coupling() = default;
  Coupling(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), q_(rows * cols, 0.0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t i, std::size_t j) const { return q_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return q_[i * cols_ + j]; }

  /// Max deviation of the marginals from (supply, demand).
  double marginal_error(std::span<const double> supply, std::span<const double> demand) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> q_;
};

struct TransportSolution {
  Coupling plan;
  double cost = 0.0;
  std::size_t pivots = 0;
};

/// Balanced transportation problem min sum c_ij q_ij solved exactly by the
/// transportation simplex (u-v potentials) with Bland's entering/leaving rule.
/// `cost` is row-major supply.size() x demand.size().
TransportSolution solve_transport(std::span<const double> supply, std::span<const double> demand,
                                  std::span<const double> cost);

}  // namespace mixest
