#include "stlsynth/driver.hpp"

#include "stlsynth/smt/encoding.hpp"
#include "stlsynth/stl/semantics.hpp"

#include <chrono>
#include <sstream>
#include <stdexcept>

namespace stlsynth {

std::string toString(SynthesisStatus s) {
  switch (s) {
    case SynthesisStatus::Satisfied: return "satisfied";
    case SynthesisStatus::Unsatisfiable: return "unsatisfiable";
    case SynthesisStatus::InfeasibleDynamics: return "infeasible-dynamics";
  }
  return "?";
}

Run horizonRun(const Formula& f, const Run& run, std::optional<int> loopStart) {
  int last = static_cast<int>(run.size()) - 1;
  if (!loopStart) return run;
  return unrollLasso(run, loopStart, std::max(last, horizonSteps(f, run.Ts)));
}

namespace {

Eigen::MatrixXd orIdentity(const Eigen::MatrixXd& M, int n) {
  return M.size() == 0 ? Eigen::MatrixXd::Identity(n, n) : M;
}

double finalRobustness(const Formula& f, const Run& run, std::optional<int> loopStart) {
  return robustnessFinite(f, horizonRun(f, run, loopStart), 0);
}

Counterexample wholePlan(const DiscretePlan& plan) {
  Counterexample c;
  c.prefix = plan.steps;
  if (plan.hasLoop()) c.loopIndex = plan.loopIndex;
  return c;
}

}  // namespace

SynthesisResult synthesize(const SynthesisConfig& cfg) {
  auto t0 = std::chrono::steady_clock::now();
  const auto& sys = cfg.system;
  sys.validate();
  if (!(cfg.delta > 0)) throw std::invalid_argument("tolerance must be positive");
  if (cfg.xInit.size() != sys.n()) throw std::invalid_argument("initial state dimension mismatch");
  const Formula& f = cfg.formula;
  const int n = sys.n(), m = sys.m();
  const Eigen::MatrixXd Qf = orIdentity(cfg.Qf, n), Q = orIdentity(cfg.Q, n), R = orIdentity(cfg.R, m);
  auto say = [&](const std::string& s) {
    if (cfg.log) cfg.log(s);
  };

  SynthesisResult res;
  auto& diag = res.diagnostics;
  const int bound = formula_bound(f, sys.Ts);
  diag.kMax = cfg.kMax ? *cfg.kMax : bound;
  if (diag.kMax < 0) throw std::invalid_argument("negative K_max");

  DiscretePlanner planner(f, n, m, sys.Ts, cfg.xInit, openSolver(cfg.smtBackend));
  FeasOptions fopt;
  fopt.delta = cfg.delta;
  fopt.method = cfg.lpMethod;
  RobOptions ropt{cfg.delta, cfg.epsilonRob.value_or(cfg.delta), cfg.lpMethod};
  bool anySat = false;
  CounterexampleSet pending;
  int K = 0;

  auto finish = [&](SynthesisStatus st) {
    res.status = st;
    diag.smtChecks = planner.checks();
    diag.wallSeconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
  };

  while (K <= diag.kMax) {
    diag.kReached = K;
    DplanResult dp = planner.dplan(K, pending);
    pending.clear();
    if (!dp.sat) {
      diag.trace.push_back({TraceEvent::Unsat, K, 0});
      say("K=" + std::to_string(K) + ": no plan");
      ++K;
      continue;
    }
    anySat = true;
    diag.trace.push_back({TraceEvent::Sat, K, 0});
    DiscretePlan plan = dp.plan;
    say("K=" + std::to_string(K) + ": plan with L=" + std::to_string(plan.loopIndex));

    FeasResult fr = feas(f, plan, sys, cfg.xInit, fopt);
    diag.lpCalls += fr.lpCalls;
    if (!fr.feasible) {
      diag.trace.push_back({TraceEvent::Infeasible, K, static_cast<int>(fr.cexs.size())});
      say("  infeasible, " + std::to_string(fr.cexs.size()) + " counterexample(s)");
      pending = std::move(fr.cexs);
      continue;
    }
    diag.trace.push_back({TraceEvent::Feasible, K, 0});

    RobustOutcome ro = rob(f, plan, fr.stretches, sys, cfg.xInit, Qf, Q, R, ropt);
    diag.lpCalls += ro.lpCalls;
    double rho = finalRobustness(f, ro.run, ro.prefix.loopStart);
    if (!(ro.rho > 0) || !(rho > 0)) {
      // Feasible only on the closed polyhedra: exclude the plan and keep searching.
      diag.trace.push_back({TraceEvent::NotRobust, K, 1});
      say("  feasible but not robust, plan excluded");
      pending.push_back(wholePlan(plan));
      continue;
    }

    plan.stretches = ro.stretches;
    res.plan = std::move(plan);
    res.run = std::move(ro.run);
    res.loopStart = ro.prefix.loopStart;
    res.prefix = std::move(ro.prefix);
    res.gains = std::move(ro.gains);
    res.planRobustness = ro.rho;
    res.feasibilityRobustness = plan_robustness(fr.prefix, fr.run);
    res.robustness = rho;
    std::ostringstream os;
    os << "  satisfied, plan robustness " << ro.rho << ", robustness " << rho;
    say(os.str());
    return finish(SynthesisStatus::Satisfied);
  }
  return finish(anySat ? SynthesisStatus::InfeasibleDynamics : SynthesisStatus::Unsatisfiable);
}

}  // namespace stlsynth
