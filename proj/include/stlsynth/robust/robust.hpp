#pragma once

#include "stlsynth/feasibility/feasibility.hpp"
#include "stlsynth/linsys/system.hpp"

#include <vector>

namespace stlsynth {

/// min over steps k and facets of P_k of h'r_k + a.
double plan_robustness(const StretchedPrefix& prefix, const Run& run);

struct RobustLpResult {
  Run run;
  double rho = 0.0;
};

/// max t s.t. t <= every facet value, x_0 = x_init, summed residuals <= delta,
/// and the prefix's loop equality. A prefix without facets returns +inf and a
/// least-residual run.
RobustLpResult robust_lp(const StretchedPrefix& prefix, const LinearSystem& sys, const Eigen::VectorXd& xInit,
                         double delta, LpMethod method = LpMethod::Auto);

struct RobustOutcome {
  Run run;
  double rho = 0.0;
  std::vector<int> stretches;
  StretchedPrefix prefix;
  GainSchedule gains;
  std::vector<double> history;  ///< rho of the baseline and of every accepted increment
  int lpCalls = 0;
};

struct RobOptions {
  double delta = 1e-6;
  double epsilon = 1e-6;  ///< minimal accepted improvement
  LpMethod method = LpMethod::Auto;
};

/// Greedy stretching of segments while the robust LP improves by at least
/// epsilon, then finite-horizon LQR gains over the final run.
RobustOutcome rob(const Formula& f, const DiscretePlan& plan, const std::vector<int>& l, const LinearSystem& sys,
                  const Eigen::VectorXd& xInit, const Eigen::MatrixXd& Qf, const Eigen::MatrixXd& Q,
                  const Eigen::MatrixXd& R, const RobOptions& opt = {});

}  // namespace stlsynth
