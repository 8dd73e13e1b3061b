#pragma once

#include <Eigen/Dense>

#include <vector>

namespace stlsynth {

/// Sampled trajectory: states x_0..x_N and inputs u_0.. (none, N or N+1 of them).
struct Run {
  std::vector<Eigen::VectorXd> states;
  std::vector<Eigen::VectorXd> inputs;
  double Ts = 1.0;

  size_t size() const { return states.size(); }
  int stateDim() const { return states.empty() ? 0 : static_cast<int>(states[0].size()); }
  int inputDim() const { return inputs.empty() ? 0 : static_cast<int>(inputs[0].size()); }

  /// Stacked (x_k, u_k). A missing final input reads as zero.
  Eigen::VectorXd point(size_t k, int inputDim) const;
  Eigen::VectorXd point(size_t k) const { return point(k, this->inputDim()); }

  /// Throws std::invalid_argument on inconsistent lengths, dimensions or non-finite values.
  void validate() const;
};

}  // namespace stlsynth
