#pragma once

#include "stlsynth/abstraction/abstraction.hpp"
#include "stlsynth/linsys/system.hpp"
#include "stlsynth/lp/lp.hpp"
#include "stlsynth/smt/encoding.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace stlsynth {

/// P_0 hull^{l_1} P_1 ... P_i, one polyhedron per time step.
struct StretchedPrefix {
  std::vector<Polyhedron> polyhedra;
  std::vector<int> segment;  ///< plan index k of P_k, or of the P_k a hull block leads into
  std::vector<bool> hull;
  /// L' when the prefix covers the whole looping plan (closes r_{K'} = r_{L'-1}).
  std::optional<int> loopStart;

  int length() const { return static_cast<int>(polyhedra.size()) - 1; }  ///< K'
};

StretchedPrefix build_prefix(const Formula& f, const DiscretePlan& plan, int i, const std::vector<int>& l);

/// Time index of plan step j in the stretched sequence.
int stretchedIndex(const std::vector<int>& l, int j);

/// Trajectory variables x_k, u_k for k = 0..K' with x_0 fixed and the loop
/// equality of the prefix, shared by the feasibility and robustness LPs.
struct TrajectoryLp {
  LinearProgram lp;
  int n = 0, m = 0, K = 0;
  int x(int k, int i) const { return k * (n + m) + i; }
  int u(int k, int i) const { return k * (n + m) + n + i; }
  LinearProgram::Terms facet(const Halfspace& h, int k) const;
  /// x_{k+1,i} - (A x_k + B u_k)_i as terms.
  LinearProgram::Terms residual(const LinearSystem& sys, int k, int i) const;
  Run extract(const Eigen::VectorXd& sol, double Ts) const;
};

TrajectoryLp trajectoryLp(const StretchedPrefix& prefix, const LinearSystem& sys, const Eigen::VectorXd& xInit);

struct FeasibilityOutcome {
  double maxSlack = 0.0;
  Run run;
  bool feasible = false;
};

FeasibilityOutcome feasibility_lp(const StretchedPrefix& prefix, const LinearSystem& sys,
                                  const Eigen::VectorXd& xInit, double delta,
                                  LpMethod method = LpMethod::Auto);

/// Whether the stretched plan's label trace (facets of the polyhedron at each
/// step) satisfies f.
bool admissible(const Formula& f, const DiscretePlan& plan, const std::vector<int>& l);

/// Largest l_i, scanning up from 0 while the stretched timing stays
/// admissible, capped by formula_bound. Returns 0 when nothing is admissible.
int max_stretch(const Formula& f, const DiscretePlan& plan, int i, const std::vector<int>& l);

struct FeasResult {
  bool feasible = false;
  Run run;
  std::vector<int> stretches;
  CounterexampleSet cexs;
  StretchedPrefix prefix;  ///< full stretched plan when feasible
  std::optional<int> loopStart;  ///< L'
  int lpCalls = 0;
};

struct FeasOptions {
  double delta = 1e-6;
  LpMethod method = LpMethod::Auto;
  /// Called after every LP probe with the segment index and stretch vector.
  std::function<void(int i, const std::vector<int>& l, const FeasibilityOutcome&)> onProbe;
};

FeasResult feas(const Formula& f, const DiscretePlan& plan, const LinearSystem& sys,
                const Eigen::VectorXd& xInit, const FeasOptions& opt = {});

/// Largest infinity-norm residual x_{k+1} - A x_k - B u_k along the run.
double dynamicsResidual(const LinearSystem& sys, const Run& run);

}  // namespace stlsynth
