#include "stlsynth/feasibility/feasibility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace stlsynth {

int stretchedIndex(const std::vector<int>& l, int j) {
  int idx = j;
  for (int k = 1; k <= j; ++k) idx += l.at(k - 1);
  return idx;
}

StretchedPrefix build_prefix(const Formula& f, const DiscretePlan& plan, int i, const std::vector<int>& l) {
  const int K = plan.K();
  if (i < 0 || i > K) throw std::out_of_range("prefix index out of range");
  if (static_cast<int>(l.size()) != K) throw std::invalid_argument("stretch vector must have K entries");
  for (int v : l)
    if (v < 0) throw std::invalid_argument("negative stretch");
  StretchedPrefix pre;
  pre.polyhedra.push_back(plan.steps[0]);
  pre.segment.push_back(0);
  pre.hull.push_back(false);
  for (int k = 1; k <= i; ++k) {
    if (l[k - 1] > 0) {
      Polyhedron h = hull_step(f, plan.source.points.at(k - 1), plan.source.points.at(k));
      for (int r = 0; r < l[k - 1]; ++r) {
        pre.polyhedra.push_back(h);
        pre.segment.push_back(k);
        pre.hull.push_back(true);
      }
    }
    pre.polyhedra.push_back(plan.steps[k]);
    pre.segment.push_back(k);
    pre.hull.push_back(false);
  }
  if (i == K && plan.hasLoop()) pre.loopStart = stretchedIndex(l, plan.loopIndex - 1) + 1;
  return pre;
}

LinearProgram::Terms TrajectoryLp::facet(const Halfspace& h, int k) const {
  LinearProgram::Terms t;
  for (int i = 0; i < n + m; ++i)
    if (h.coeffs[i] != 0.0) t.emplace_back(k * (n + m) + i, h.coeffs[i]);
  return t;
}

LinearProgram::Terms TrajectoryLp::residual(const LinearSystem& sys, int k, int i) const {
  LinearProgram::Terms t{{x(k + 1, i), 1.0}};
  for (int j = 0; j < n; ++j)
    if (sys.A(i, j) != 0.0) t.emplace_back(x(k, j), -sys.A(i, j));
  for (int j = 0; j < m; ++j)
    if (sys.B(i, j) != 0.0) t.emplace_back(u(k, j), -sys.B(i, j));
  return t;
}

Run TrajectoryLp::extract(const Eigen::VectorXd& sol, double Ts) const {
  Run run;
  run.Ts = Ts;
  for (int k = 0; k <= K; ++k) {
    run.states.push_back(sol.segment(x(k, 0), n));
    run.inputs.push_back(sol.segment(x(k, 0) + n, m));
  }
  return run;
}

TrajectoryLp trajectoryLp(const StretchedPrefix& prefix, const LinearSystem& sys, const Eigen::VectorXd& xInit) {
  if (prefix.polyhedra.empty()) throw std::invalid_argument("empty prefix");
  if (xInit.size() != sys.n()) throw std::invalid_argument("initial state dimension mismatch");
  TrajectoryLp t;
  t.n = sys.n();
  t.m = sys.m();
  t.K = prefix.length();
  t.lp.addVariables((t.K + 1) * (t.n + t.m));
  for (int i = 0; i < t.n; ++i) t.lp.addEqual({{t.x(0, i), 1.0}}, xInit[i]);
  if (prefix.loopStart) {
    int back = *prefix.loopStart - 1;
    for (int i = 0; i < t.n + t.m; ++i)
      t.lp.addEqual({{t.K * (t.n + t.m) + i, 1.0}, {back * (t.n + t.m) + i, -1.0}}, 0.0);
  }
  return t;
}

FeasibilityOutcome feasibility_lp(const StretchedPrefix& prefix, const LinearSystem& sys,
                                  const Eigen::VectorXd& xInit, double delta, LpMethod method) {
  if (!(delta > 0)) throw std::invalid_argument("tolerance must be positive");
  TrajectoryLp t = trajectoryLp(prefix, sys, xInit);
  auto& lp = t.lp;
  for (int k = 0; k <= t.K; ++k)
    for (auto& h : prefix.polyhedra[k].facets()) lp.addGreaterEqual(t.facet(h, k), -h.offset);
  int s0 = lp.addVariables(t.K, 1.0);  // s_1..s_K' at s0 + k - 1
  for (int k = 0; k < t.K; ++k) {
    int s = s0 + k;
    for (int i = 0; i < t.n; ++i) {
      auto r = t.residual(sys, k, i);
      auto plus = r, minus = r;
      plus.emplace_back(s, -1.0);
      for (auto& term : minus) term.second = -term.second;
      minus.emplace_back(s, -1.0);
      lp.addLessEqual(std::move(plus), 0.0);
      lp.addLessEqual(std::move(minus), 0.0);
    }
    lp.addGreaterEqual({{s, 1.0}}, 0.0);
    if (k + 1 < t.K) lp.addLessEqual({{s, 1.0}, {s0 + t.K - 1, -1.0}}, 0.0);
  }
  LpResult r = solveLp(lp, method);
  FeasibilityOutcome out;
  if (r.status == LpStatus::Infeasible) {
    out.maxSlack = std::numeric_limits<double>::infinity();
    return out;
  }
  if (r.status != LpStatus::Optimal) throw std::runtime_error("feasibility LP: solver " + toString(r.status));
  out.run = t.extract(r.x, sys.Ts);
  out.maxSlack = t.K > 0 ? std::max(0.0, r.x[s0 + t.K - 1]) : 0.0;
  out.feasible = out.maxSlack <= delta;
  return out;
}

double dynamicsResidual(const LinearSystem& sys, const Run& run) {
  double worst = 0.0;
  for (size_t k = 0; k + 1 < run.size(); ++k) {
    Eigen::VectorXd r = run.states[k + 1] - sys.A * run.states[k] - sys.B * run.inputs.at(k);
    worst = std::max(worst, r.cwiseAbs().maxCoeff());
  }
  return worst;
}

namespace {

/// Atom truth tables of a plan: per plan step and per hull block.
struct LabelTable {
  FlatFormula flat;
  std::vector<std::vector<char>> step;  // [k][node]
  std::vector<std::vector<char>> hull;  // [k][node], segment k between P_{k-1} and P_k

  LabelTable(const Formula& f, const DiscretePlan& plan) : flat(f) {
    const int K = plan.K();
    step.assign(K + 1, std::vector<char>(flat.nodes.size(), 0));
    hull.assign(K + 1, std::vector<char>(flat.nodes.size(), 0));
    for (int id = 0; id < static_cast<int>(flat.nodes.size()); ++id) {
      const auto& nd = flat.nodes[id];
      if (nd.kind != NodeKind::Pred && nd.kind != NodeKind::NegPred) continue;
      for (int k = 0; k <= K; ++k) step[k][id] = plan.steps[k].hasFacet(nd.literal);
      for (int k = 1; k <= K; ++k) hull[k][id] = step[k - 1][id] && step[k][id];
    }
  }

  bool satisfied(const DiscretePlan& plan, const std::vector<int>& l) const {
    const int K = plan.K();
    std::vector<const std::vector<char>*> pos{&step[0]};
    for (int k = 1; k <= K; ++k) {
      for (int r = 0; r < l[k - 1]; ++r) pos.push_back(&hull[k]);
      pos.push_back(&step[k]);
    }
    Lasso lasso{static_cast<int>(pos.size()) - 1, std::nullopt};
    if (plan.hasLoop()) lasso.loopStart = stretchedIndex(l, plan.loopIndex - 1) + 1;
    auto val = evaluateNodes(
        flat, plan.source.Ts, lasso, [&](int id, int q) { return (*pos[q])[id] ? 1.0 : -1.0; }, true);
    return val[0][0] > 0;
  }
};

int scanMaxStretch(const LabelTable& table, const Formula& f, const DiscretePlan& plan, int i,
                   std::vector<int> l) {
  const int cap = formula_bound(f, plan.source.Ts);
  int best = -1;
  for (int v = 0; v <= cap; ++v) {
    l[i - 1] = v;
    if (!table.satisfied(plan, l)) break;
    best = v;
  }
  return best;
}

}  // namespace

bool admissible(const Formula& f, const DiscretePlan& plan, const std::vector<int>& l) {
  if (static_cast<int>(l.size()) != plan.K()) throw std::invalid_argument("stretch vector must have K entries");
  return LabelTable(f, plan).satisfied(plan, l);
}

int max_stretch(const Formula& f, const DiscretePlan& plan, int i, const std::vector<int>& l) {
  if (i < 1 || i > plan.K()) throw std::out_of_range("segment index out of range");
  if (static_cast<int>(l.size()) != plan.K()) throw std::invalid_argument("stretch vector must have K entries");
  return std::max(0, scanMaxStretch(LabelTable(f, plan), f, plan, i, l));
}

FeasResult feas(const Formula& f, const DiscretePlan& plan, const LinearSystem& sys,
                const Eigen::VectorXd& xInit, const FeasOptions& opt) {
  const int K = plan.K();
  FeasResult res;
  std::vector<int> l(K, 0);
  LabelTable table(f, plan);
  const int cap = formula_bound(f, plan.source.Ts);

  auto probe = [&](int i) {
    ++res.lpCalls;
    auto out = feasibility_lp(build_prefix(f, plan, i, l), sys, xInit, opt.delta, opt.method);
    if (opt.onProbe) opt.onProbe(i, l, out);
    return out;
  };
  auto addCex = [&](int i) {
    Counterexample c;
    c.prefix.assign(plan.steps.begin(), plan.steps.begin() + i + 1);
    if (i == K && plan.hasLoop()) c.loopIndex = plan.loopIndex;
    res.cexs.push_back(std::move(c));
  };

  if (K == 0) {
    auto out = probe(0);
    if (!out.feasible) {
      addCex(0);
      return res;
    }
    res.feasible = true;
    res.run = out.run;
    res.prefix = build_prefix(f, plan, 0, l);
    return res;
  }

  FeasibilityOutcome last;
  for (int i = 1; i <= K; ++i) {
    int rr = i - 1;  // round-robin pointer over earlier segments
    bool recorded = false;
    while (true) {
      l[i - 1] = 0;
      int lmax = table.satisfied(plan, l) ? scanMaxStretch(table, f, plan, i, l) : -1;
      int lmin = -1, found = -1;
      FeasibilityOutcome best;
      // Under monotonicity an infeasible l_max rules out the whole range.
      if (lmax >= 0) {
        l[i - 1] = lmax;
        auto out = probe(i);
        if (out.feasible) {
          found = lmax;
          best = std::move(out);
          --lmax;
        } else {
          lmin = lmax;
        }
      }
      while (lmin < lmax) {
        int lN = static_cast<int>(std::ceil((lmax + lmin) / 2.0));
        l[i - 1] = lN;
        auto out = probe(i);
        if (out.feasible) {
          lmax = lN - 1;
          found = lN;
          best = std::move(out);
        } else {
          lmin = lN;
        }
      }
      if (found >= 0) {
        l[i - 1] = found;
        last = std::move(best);
        break;
      }
      if (!recorded) {
        addCex(i);
        recorded = true;
      }
      // Lengthen an earlier segment, round robin from i-1 down to 1.
      bool moved = false;
      for (int tried = 0; tried < i - 1 && !moved; ++tried) {
        int j = rr;
        rr = rr == 1 ? i - 1 : rr - 1;
        if (l[j - 1] >= cap) continue;
        auto trial = l;
        trial[j - 1] += 1;
        trial[i - 1] = 0;
        if (table.satisfied(plan, trial)) {
          l = trial;
          moved = true;
        }
      }
      if (!moved) {
        res.stretches = l;
        return res;
      }
    }
  }
  res.feasible = true;
  res.run = std::move(last.run);
  res.stretches = l;
  res.prefix = build_prefix(f, plan, K, l);
  res.loopStart = res.prefix.loopStart;
  res.cexs.clear();
  return res;
}

}  // namespace stlsynth
