#include "stlsynth/robust/robust.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace stlsynth {

double plan_robustness(const StretchedPrefix& prefix, const Run& run) {
  if (run.size() != prefix.polyhedra.size()) throw std::invalid_argument("run length does not match the prefix");
  const int m = run.inputDim();
  double rho = std::numeric_limits<double>::infinity();
  for (size_t k = 0; k < run.size(); ++k) rho = std::min(rho, minFacetValue(prefix.polyhedra[k], run.point(k, m)));
  return rho;
}

RobustLpResult robust_lp(const StretchedPrefix& prefix, const LinearSystem& sys, const Eigen::VectorXd& xInit,
                         double delta, LpMethod method) {
  if (!(delta > 0)) throw std::invalid_argument("tolerance must be positive");
  TrajectoryLp t = trajectoryLp(prefix, sys, xInit);
  auto& lp = t.lp;
  bool anyFacet = false;
  for (auto& P : prefix.polyhedra) anyFacet = anyFacet || !P.isWholeSpace();

  int tv = -1;
  if (anyFacet) {
    tv = lp.addVariable(-1.0);
    for (int k = 0; k <= t.K; ++k)
      for (auto& h : prefix.polyhedra[k].facets()) {
        auto terms = t.facet(h, k);
        for (auto& term : terms) term.second = -term.second;
        terms.emplace_back(tv, 1.0);
        lp.addLessEqual(std::move(terms), h.offset);
      }
  }
  int e0 = lp.addVariables(t.K, anyFacet ? 0.0 : 1.0);
  LinearProgram::Terms budget;
  for (int k = 0; k < t.K; ++k) {
    int e = e0 + k;
    for (int i = 0; i < t.n; ++i) {
      auto r = t.residual(sys, k, i);
      auto plus = r, minus = r;
      plus.emplace_back(e, -1.0);
      for (auto& term : minus) term.second = -term.second;
      minus.emplace_back(e, -1.0);
      lp.addLessEqual(std::move(plus), 0.0);
      lp.addLessEqual(std::move(minus), 0.0);
    }
    lp.addGreaterEqual({{e, 1.0}}, 0.0);
    budget.emplace_back(e, 1.0);
  }
  if (!budget.empty()) lp.addLessEqual(budget, delta);

  LpResult r = solveLp(lp, method);
  if (r.status != LpStatus::Optimal)
    throw std::runtime_error("robustness LP: solver " + toString(r.status) +
                             " (the prefix should be feasible after the feasibility phase)");
  RobustLpResult out;
  out.run = t.extract(r.x, sys.Ts);
  out.rho = anyFacet ? r.x[tv] : std::numeric_limits<double>::infinity();
  return out;
}

RobustOutcome rob(const Formula& f, const DiscretePlan& plan, const std::vector<int>& l, const LinearSystem& sys,
                  const Eigen::VectorXd& xInit, const Eigen::MatrixXd& Qf, const Eigen::MatrixXd& Q,
                  const Eigen::MatrixXd& R, const RobOptions& opt) {
  const int K = plan.K();
  RobustOutcome out;
  out.stretches = l;
  out.prefix = build_prefix(f, plan, K, l);
  auto base = robust_lp(out.prefix, sys, xInit, opt.delta, opt.method);
  ++out.lpCalls;
  out.run = std::move(base.run);
  out.rho = base.rho;
  out.history.push_back(out.rho);

  const int cap = formula_bound(f, plan.source.Ts);
  bool improved = std::isfinite(out.rho);
  while (improved) {
    improved = false;
    for (int i = 1; i <= K; ++i) {
      auto trial = out.stretches;
      trial[i - 1] += 1;
      if (trial[i - 1] > cap || !admissible(f, plan, trial)) continue;
      auto prefix = build_prefix(f, plan, K, trial);
      auto cand = robust_lp(prefix, sys, xInit, opt.delta, opt.method);
      ++out.lpCalls;
      if (cand.rho - out.rho >= opt.epsilon) {
        out.stretches = std::move(trial);
        out.prefix = std::move(prefix);
        out.run = std::move(cand.run);
        out.rho = cand.rho;
        out.history.push_back(out.rho);
        improved = true;
      }
    }
  }
  out.gains = lqr_gains(sys, Qf, Q, R, out.prefix.length());
  return out;
}

}  // namespace stlsynth
