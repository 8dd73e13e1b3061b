#pragma once

#include "stlsynth/abstraction/abstraction.hpp"
#include "stlsynth/feasibility/feasibility.hpp"
#include "stlsynth/linsys/system.hpp"
#include "stlsynth/robust/robust.hpp"
#include "stlsynth/stl/formula.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace stlsynth {

struct SynthesisConfig {
  Formula formula;
  LinearSystem system;
  Eigen::VectorXd xInit;
  double delta = 1e-6;
  std::optional<double> epsilonRob;  ///< robustness improvement threshold, delta when unset
  Eigen::MatrixXd Qf, Q, R;          ///< identity when left empty
  std::optional<int> kMax;           ///< formula_bound when unset
  std::string smtBackend = "z3";
  LpMethod lpMethod = LpMethod::Auto;
  std::function<void(const std::string&)> log;  ///< progress lines, optional
};

enum class SynthesisStatus { Satisfied, Unsatisfiable, InfeasibleDynamics };
std::string toString(SynthesisStatus s);

/// One step of the search, in order.
struct TraceEvent {
  enum Kind { Unsat, Sat, Infeasible, Feasible, NotRobust } kind;
  int K = 0;
  int counterexamples = 0;  ///< new counterexamples for Infeasible / NotRobust
};

struct SynthesisDiagnostics {
  int kReached = 0;
  int kMax = 0;
  int smtChecks = 0;
  int lpCalls = 0;
  double wallSeconds = 0.0;
  std::vector<TraceEvent> trace;
};

struct SynthesisResult {
  SynthesisStatus status = SynthesisStatus::Unsatisfiable;
  Run run;                       ///< nominal run r_0..r_K'
  std::optional<int> loopStart;  ///< L', r_K' = r_{L'-1}
  DiscretePlan plan;             ///< stretches filled in
  StretchedPrefix prefix;
  GainSchedule gains;
  double planRobustness = 0.0;
  double feasibilityRobustness = 0.0;  ///< plan robustness of the feasibility-phase run
  double robustness = 0.0;             ///< of the nominal run, unrolled over the formula horizon
  SynthesisDiagnostics diagnostics;
};

/// Nominal run extended to cover the formula horizon (through the loop when
/// there is one).
Run horizonRun(const Formula& f, const Run& run, std::optional<int> loopStart);

SynthesisResult synthesize(const SynthesisConfig& cfg);

}  // namespace stlsynth
