#pragma once

#include "stlsynth/run.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace stlsynth {

/// x_{k+1} = A x_k + B u_k sampled every Ts seconds.
struct LinearSystem {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  double Ts = 1.0;
  std::vector<std::string> stateNames;
  std::vector<std::string> inputNames;

  int n() const { return static_cast<int>(A.rows()); }
  int m() const { return static_cast<int>(B.cols()); }
  /// State names followed by input names, the variable order of predicates.
  std::vector<std::string> variableNames() const;
  void validate() const;
};

/// Per-step additive disturbance w_k.
using Disturbance = std::function<Eigen::VectorXd(size_t k)>;

/// Seeded source of w_k uniform in [-bound, bound]^n.
Disturbance uniformBoxDisturbance(unsigned long long seed, double bound, int n);

Run simulate(const LinearSystem& sys, const Eigen::VectorXd& x0,
             const std::vector<Eigen::VectorXd>& inputs,
             const Disturbance& disturbance = nullptr);

struct GainSchedule {
  std::vector<Eigen::MatrixXd> gains;  ///< F_0..F_{K-1}
  std::vector<Eigen::MatrixXd> costs;  ///< P_0..P_K
  int horizon() const { return static_cast<int>(gains.size()); }
};

/// Finite-horizon Riccati recursion from P_K = Qf.
GainSchedule lqr_gains(const LinearSystem& sys, const Eigen::MatrixXd& Qf, const Eigen::MatrixXd& Q,
                       const Eigen::MatrixXd& R, int K);

/// Closed loop u_k = u*_k - F_k (x_k - x*_k) around a nominal run. With
/// `loopStart`, steps past the gain horizon reuse the gains of the looping
/// part, so the nominal run may be longer than the schedule.
Run track(const LinearSystem& sys, const Run& nominal, const GainSchedule& gains,
          const Eigen::VectorXd& x0, const Disturbance& disturbance = nullptr,
          std::optional<int> loopStart = std::nullopt);

}  // namespace stlsynth
