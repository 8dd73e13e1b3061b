// Acceptance checks, one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include "oracle.hpp"

#include "stlsynth/driver.hpp"
#include "stlsynth/linsys/io.hpp"
#include "stlsynth/smt/encoding.hpp"
#include "stlsynth/stl/parser.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>

using namespace stlsynth;

namespace {

std::string dataFile(const std::string& name) { return std::string(STLSYNTH_DATA_DIR) + "/" + name; }

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd r(static_cast<int>(v.size()));
  int i = 0;
  for (double d : v) r[i++] = d;
  return r;
}

struct Verdict {
  bool pass = true;
  std::ostringstream detail;
  void fail(const std::string& why) {
    if (pass) detail << "first failure: " << why << "; ";
    pass = false;
  }
  void require(bool ok, const std::string& why) {
    if (!ok) fail(why);
  }
};

SynthesisConfig loadConfig(const std::string& spec, const std::string& system) {
  SystemFile sf = loadSystemFile(dataFile(system));
  SynthesisConfig cfg;
  cfg.system = sf.system;
  cfg.xInit = *sf.x0;
  cfg.formula = parse_formula(readTextFile(dataFile(spec)), sf.system.variableNames());
  return cfg;
}

LinearSystem integrator(int dim) {
  LinearSystem s;
  s.A = Eigen::MatrixXd::Identity(dim, dim);
  s.B = Eigen::MatrixXd::Identity(dim, dim);
  const char* xs[] = {"x", "y"};
  const char* us[] = {"vx", "vy"};
  for (int i = 0; i < dim; ++i) {
    s.stateNames.push_back(dim == 1 ? "x" : xs[i]);
    s.inputNames.push_back(dim == 1 ? "u" : us[i]);
  }
  return s;
}

/// r_0..r_{L-1} then the loop body r_L..r_K forever; without a loop the K+2
/// points as they are.
std::vector<Eigen::VectorXd> unrollPoints(const CoarseRun& cr, int count) {
  const int K = cr.K(), L = cr.loopIndex;
  if (L > K) return cr.points;
  std::vector<Eigen::VectorXd> out;
  for (int j = 0; j < count; ++j) out.push_back(cr.points[j <= K ? j : L + (j - L) % (K - L + 1)]);
  return out;
}

bool coarseOracle(const Formula& f, const CoarseRun& cr) {
  return oracle::coarseBoolean(f, unrollPoints(cr, oracle::horizon(f, cr.Ts) + 2), cr.Ts);
}

std::vector<Eigen::VectorXd> points(const Run& run) {
  std::vector<Eigen::VectorXd> p;
  for (size_t k = 0; k < run.size(); ++k) p.push_back(run.point(k));
  return p;
}

/// Robustness of a synthesized run through the recursive evaluator.
double oracleRobustness(const Formula& f, const SynthesisResult& res) {
  return oracle::robustness(f, points(horizonRun(f, res.run, res.loopStart)), 0, res.run.Ts);
}

bool escapes(const Counterexample& cex, const CoarseRun& cr) {
  if (cex.loopIndex && cr.loopIndex != *cex.loopIndex) return true;
  for (size_t k = 0; k < cex.prefix.size(); ++k)
    if (!contains(cex.prefix[k], cr.points[k])) return true;
  return false;
}

std::string num(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.4g", v);
  return b;
}

// Shared between criteria.
std::optional<SynthesisResult> reachAvoid, quadrotor;
SynthesisConfig reachAvoidCfg, quadrotorCfg;

Verdict reachAvoidReproduction() {
  Verdict v;
  auto& cfg = reachAvoidCfg = loadConfig("reach_avoid.stl", "integrator2d.json");
  cfg.Qf = 10 * Eigen::MatrixXd::Identity(2, 2);
  cfg.Q = Eigen::MatrixXd::Identity(2, 2);
  cfg.R = Eigen::MatrixXd::Identity(2, 2);
  reachAvoid = synthesize(cfg);
  const auto& res = *reachAvoid;
  v.require(res.status == SynthesisStatus::Satisfied, "status " + toString(res.status));
  if (!v.pass) return v;
  v.require(res.plan.K() == 2 && res.plan.loopIndex == 2,
            "plan K=" + std::to_string(res.plan.K()) + " L=" + std::to_string(res.plan.loopIndex));
  for (int k = 0; k <= res.prefix.length(); ++k)
    v.require(containsRelaxed(res.prefix.polyhedra[k], res.run.point(k), cfg.delta),
              "step " + std::to_string(k) + " outside its polyhedron");
  v.require(dynamicsResidual(cfg.system, res.run) <= cfg.delta, "dynamics residual above delta");
  v.require(res.planRobustness > res.feasibilityRobustness, "robust phase did not improve the plan robustness");
  double rho = oracleRobustness(cfg.formula, res);
  v.require(rho > 0, "robustness " + num(rho));
  v.require(res.diagnostics.wallSeconds <= 5.0, "took " + num(res.diagnostics.wallSeconds) + " s");
  v.detail << "K=2 L=2, stretched length " << res.prefix.length() << ", plan robustness "
           << num(res.feasibilityRobustness) << " -> " << num(res.planRobustness) << ", robustness " << num(rho)
           << ", " << num(res.diagnostics.wallSeconds) << " s";
  return v;
}

Verdict quadrotorInspection() {
  Verdict v;
  auto& cfg = quadrotorCfg = loadConfig("quadrotor.stl", "quadrotor.json");
  quadrotor = synthesize(cfg);
  const auto& res = *quadrotor;
  v.require(res.status == SynthesisStatus::Satisfied, "status " + toString(res.status));
  if (!v.pass) return v;
  double rho = oracleRobustness(cfg.formula, res);
  v.require(rho > 0, "robustness " + num(rho));
  v.require(dynamicsResidual(cfg.system, res.run) <= cfg.delta, "dynamics residual above delta");
  v.require(res.diagnostics.wallSeconds <= 60.0, "took " + num(res.diagnostics.wallSeconds) + " s");
  v.detail << "K=" << res.plan.K() << " L=" << res.plan.loopIndex << ", stretched length " << res.prefix.length()
           << ", robustness " << num(rho) << ", " << res.diagnostics.smtChecks << " smt checks, "
           << res.diagnostics.lpCalls << " lp solves, " << num(res.diagnostics.wallSeconds) << " s";
  return v;
}

Verdict disturbanceTracking() {
  Verdict v;
  if (!reachAvoid || reachAvoid->status != SynthesisStatus::Satisfied) {
    v.fail("no reach-avoid run");
    return v;
  }
  const auto& res = *reachAvoid;
  const auto& cfg = reachAvoidCfg;
  Run nominal = horizonRun(cfg.formula, res.run, res.loopStart);
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unit(-0.1, 0.1);
  double worstErr = 0, worstRho = oracle::kInf;
  for (int e = 0; e < 100; ++e) {
    Eigen::VectorXd x0 = cfg.xInit + vec({unit(rng), unit(rng)});
    Run exec = track(cfg.system, nominal, res.gains, x0, uniformBoxDisturbance(1000 + e, 0.1, 2), res.loopStart);
    for (size_t k = 0; k < nominal.size(); ++k)
      worstErr = std::max(worstErr, (exec.states[k] - nominal.states[k]).cwiseAbs().maxCoeff());
    worstRho = std::min(worstRho, oracle::robustness(cfg.formula, points(exec), 0, exec.Ts));
  }
  v.require(worstErr < res.planRobustness, "tracking error " + num(worstErr) + " >= " + num(res.planRobustness));
  v.require(worstRho > 0, "an execution has robustness " + num(worstRho));
  v.detail << "100 executions, max tracking error " << num(worstErr) << " < plan robustness "
           << num(res.planRobustness) << ", min robustness " << num(worstRho);
  return v;
}

Verdict coarseAgreesWithUnrolled() {
  Verdict v;
  std::mt19937_64 rng(101);
  oracle::FormulaGen gen{rng, 2, 5};
  std::uniform_int_distribution<int> kd(0, 8);
  int cases = 0, trues = 0;
  while (cases < 500) {
    Formula f = gen(3);
    if (formula_bound(f, 1.0) > 30) continue;
    CoarseRun cr;
    cr.stateDim = 1;
    const int K = kd(rng);
    cr.loopIndex = std::uniform_int_distribution<int>(1, K + 1)(rng);
    for (int k = 0; k < K + 2; ++k) cr.points.push_back(oracle::randomPoint(rng, 2, 3));
    if (cr.hasLoop()) {
      cr.points[K] = cr.points[cr.loopIndex - 1];
      cr.points[K + 1] = cr.points[cr.loopIndex];
    }
    bool lib = coarse_satisfies(f, cr), ref = coarseOracle(f, cr);
    v.require(lib == ref, "disagreement on case " + std::to_string(cases));
    trues += ref;
    ++cases;
  }
  v.detail << cases << " random lasso runs, " << trues << " satisfied, 100% agreement";
  if (!v.pass) v.detail << " (not reached)";
  return v;
}

Verdict planRobustnessLowerBound() {
  Verdict v;
  int cases = 0;
  auto check = [&](const Formula& f, const SynthesisResult& res, const std::string& what) {
    double rho = oracleRobustness(f, res);
    double bar = plan_robustness(res.prefix, res.run);
    v.require(bar <= rho + 1e-9, what + ": plan robustness " + num(bar) + " > robustness " + num(rho));
    ++cases;
  };
  if (reachAvoid && reachAvoid->status == SynthesisStatus::Satisfied)
    check(reachAvoidCfg.formula, *reachAvoid, "reach-avoid");
  else
    v.fail("no reach-avoid run");
  if (quadrotor && quadrotor->status == SynthesisStatus::Satisfied)
    check(quadrotorCfg.formula, *quadrotor, "quadrotor");
  else
    v.fail("no quadrotor run");

  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> cell(0, 5), x0d(1, 29), pick(0, 2), hi(6, 20);
  int worlds = 0, attempts = 0;
  auto box = [&](int x0, int y0, int w, int h) {
    return std::to_string(x0) + " < x < " + std::to_string(x0 + w) + " & " + std::to_string(y0) + " < y < " +
           std::to_string(y0 + h);
  };
  while (worlds < 50 && attempts < 300) {
    ++attempts;
    // 30x30 workspace on a 5-unit grid, one obstacle cell, one goal cell.
    int ox = 5 * cell(rng), oy = 5 * cell(rng), gx = 5 * cell(rng), gy = 5 * cell(rng);
    if (ox == gx && oy == gy) continue;
    Eigen::VectorXd x0 = vec({x0d(rng) + 0.5, x0d(rng) + 0.5});
    if (x0[0] > ox && x0[0] < ox + 5 && x0[1] > oy && x0[1] < oy + 5) continue;
    std::string safe = "(x < " + std::to_string(ox) + " | x > " + std::to_string(ox + 5) + " | y < " +
                       std::to_string(oy) + " | y > " + std::to_string(oy + 5) + ") & 0 < x < 30 & 0 < y < 30";
    std::string goal = box(gx, gy, 5, 5), b = std::to_string(hi(rng));
    std::string text;
    switch (pick(rng)) {
      case 0: text = "(" + safe + ") U[0," + b + "] (" + goal + ")"; break;
      case 1: text = "G[0," + b + "] (" + safe + ") & F[0," + b + "] (" + goal + ")"; break;
      default: text = "F[0," + b + "] (" + goal + ") & G[0,4] (-4 < vx < 4 & -4 < vy < 4)"; break;
    }
    SynthesisConfig cfg;
    cfg.system = integrator(2);
    cfg.xInit = x0;
    cfg.formula = parse_formula(text, cfg.system.variableNames());
    cfg.kMax = 5;
    auto res = synthesize(cfg);
    if (res.status != SynthesisStatus::Satisfied) continue;
    check(cfg.formula, res, "world " + std::to_string(worlds));
    ++worlds;
  }
  v.require(worlds == 50, "only " + std::to_string(worlds) + " satisfiable worlds");
  v.detail << cases << " synthesized runs (" << worlds << " random box worlds), plan robustness <= robustness in all";
  return v;
}

Verdict plannerSoundness() {
  Verdict v;
  std::mt19937_64 rng(55);
  oracle::FormulaGen gen{rng, 2, 4};
  int instances = 0, models = 0, attempts = 0;
  while (instances < 200 && attempts < 2000) {
    ++attempts;
    Formula f = gen(3);
    Eigen::VectorXd x0 = oracle::randomPoint(rng, 1, 3);
    DiscretePlanner pl(f, 1, 1, 1.0, x0, openSolver("z3"));
    CounterexampleSet all;
    bool any = false;
    for (int K = 0; K <= 5 && !any; ++K) {
      auto r = pl.dplan(K);
      for (int round = 0; r.sat && round < 3; ++round) {
        any = true;
        ++models;
        const auto& cr = r.run;
        v.require(coarseOracle(f, cr), "model violates the coarse semantics");
        v.require((cr.points[0].head(1) - x0).cwiseAbs().maxCoeff() <= 1e-12, "model moved x_0");
        for (auto& c : all) v.require(escapes(c, cr), "model inside a counterexample");
        // Exclude a random prefix of this plan and ask again.
        int len = std::uniform_int_distribution<int>(1, K + 1)(rng);
        Counterexample c;
        c.prefix.assign(r.plan.steps.begin(), r.plan.steps.begin() + len);
        if (len == K + 1 && r.plan.hasLoop()) c.loopIndex = r.plan.loopIndex;
        all.push_back(c);
        r = pl.dplan(K, {c});
      }
    }
    instances += any;
  }
  v.require(instances == 200, "only " + std::to_string(instances) + " satisfiable instances");
  v.detail << instances << " instances, " << models << " models checked against the recursive evaluator, x_0 and "
           << "every counterexample";
  return v;
}

/// Feasibility of the whole stretched plan for every admissible stretch vector.
bool exhaustivelyFeasible(const Formula& f, const DiscretePlan& plan, const LinearSystem& sys,
                          const Eigen::VectorXd& x0, int cap) {
  const int K = plan.K();
  std::vector<int> l(K, 0);
  while (true) {
    if (admissible(f, plan, l) && feasibility_lp(build_prefix(f, plan, K, l), sys, x0, 1e-6).feasible) return true;
    int i = 0;
    while (i < K && l[i] == cap) l[i++] = 0;
    if (i == K) return false;
    ++l[i];
  }
}

Verdict feasCompleteness() {
  Verdict v;
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> pick(0, 3), c(1, 6), a(0, 2);
  std::uniform_real_distribution<double> b(0.4, 2.5);
  const LinearSystem sys = integrator(1);
  int instances = 0, feasible = 0, attempts = 0, maxLmax = 0;
  while (instances < 30 && attempts < 500) {
    ++attempts;
    std::string speed = "G[0,4] (" + num(-b(rng)) + " < u < " + num(b(rng)) + ")";
    std::string text;
    int c1 = c(rng), c2 = c(rng);
    switch (pick(rng)) {
      case 0: text = speed + " & F[" + std::to_string(a(rng)) + ",4] x > " + std::to_string(c1); break;
      case 1: text = speed + " & F[0,2] x > " + std::to_string(c1) + " & F[2,4] x < " + std::to_string(c1 - c2); break;
      case 2: text = speed + " & (x < " + std::to_string(c1) + " U[1,4] x > " + std::to_string(c1 + 1) + ")"; break;
      default: text = speed + " & G[2,4] x > " + std::to_string(c1); break;
    }
    Formula f = parse_formula(text, {"x", "u"});
    if (formula_bound(f, 1.0) > 4) continue;
    Eigen::VectorXd x0 = vec({0});
    DiscretePlanner pl(f, 1, 1, 1.0, x0, openSolver("z3"));
    std::optional<DiscretePlan> plan;
    for (int K = 0; K <= 3 && !plan; ++K) {
      auto r = pl.dplan(K);
      if (r.sat) plan = r.plan;
    }
    if (!plan || plan->K() == 0) continue;
    const int cap = formula_bound(f, 1.0);
    for (int i = 1; i <= plan->K(); ++i) maxLmax = std::max(maxLmax, max_stretch(f, *plan, i, std::vector<int>(plan->K(), 0)));
    bool got = feas(f, *plan, sys, x0).feasible;
    bool want = exhaustivelyFeasible(f, *plan, sys, x0, cap);
    v.require(got == want, "instance " + std::to_string(instances) + " (" + text + "): feas says " +
                               (got ? "feasible" : "infeasible") + ", enumeration " +
                               (want ? "feasible" : "infeasible"));
    feasible += got;
    ++instances;
  }
  v.require(instances == 30, "only " + std::to_string(instances) + " instances");
  v.detail << instances << " plans with K <= 3, " << feasible << " feasible, " << instances - feasible
           << " infeasible, largest l_max " << maxLmax << ", verdicts match enumeration";
  return v;
}

Verdict lqrNumerics() {
  Verdict v;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> d(-1.5, 1.5), pos(0.1, 3);
  // Random systems: costs symmetric and positive semidefinite.
  for (int t = 0; t < 50; ++t) {
    const int n = 1 + t % 4, m = 1 + t % 2;
    LinearSystem s;
    s.A = Eigen::MatrixXd::NullaryExpr(n, n, [&] { return d(rng); });
    s.B = Eigen::MatrixXd::NullaryExpr(n, m, [&] { return d(rng); });
    Eigen::MatrixXd G = Eigen::MatrixXd::NullaryExpr(n, n, [&] { return d(rng); });
    Eigen::MatrixXd Q = G * G.transpose(), R = pos(rng) * Eigen::MatrixXd::Identity(m, m);
    auto g = lqr_gains(s, 10 * Q, Q, R, 20);
    for (auto& P : g.costs) {
      double asym = (P - P.transpose()).cwiseAbs().maxCoeff();
      v.require(asym <= 1e-12 * (1 + P.cwiseAbs().maxCoeff()), "asymmetric cost, " + num(asym));
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (P + P.transpose()));
      v.require(es.eigenvalues().minCoeff() >= -1e-9 * (1 + P.norm()), "cost not positive semidefinite");
    }
  }
  // Scalar gains against the closed-form recursion.
  double worstGain = 0;
  for (int t = 0; t < 50; ++t) {
    double a = d(rng), b = d(rng), q = pos(rng), r = pos(rng), qf = pos(rng);
    if (t == 0) a = b = q = r = 1, qf = 10;
    LinearSystem s;
    s.A = Eigen::MatrixXd::Constant(1, 1, a);
    s.B = Eigen::MatrixXd::Constant(1, 1, b);
    auto g = lqr_gains(s, Eigen::MatrixXd::Constant(1, 1, qf), Eigen::MatrixXd::Constant(1, 1, q),
                       Eigen::MatrixXd::Constant(1, 1, r), 10);
    double P = qf;
    for (int k = 9; k >= 0; --k) {
      double F = a * b * P / (r + b * b * P);
      worstGain = std::max(worstGain, std::abs(F - g.gains[k](0, 0)) / std::max(1.0, std::abs(F)));
      P = q + a * a * P - a * b * P * F;
    }
    if (t == 0) v.require(std::abs(g.gains[9](0, 0) - 10.0 / 11.0) <= 1e-12, "scalar gain is not 10/11");
  }
  v.require(worstGain <= 1e-12, "scalar gain off by " + num(worstGain));
  // Zero disturbance reproduces the synthesized nominal runs.
  double worstTrack = 0;
  int runs = 0;
  for (auto* res : {&reachAvoid, &quadrotor}) {
    if (!*res || (*res)->status != SynthesisStatus::Satisfied) continue;
    const auto& sys = res == &reachAvoid ? reachAvoidCfg.system : quadrotorCfg.system;
    const auto& f = res == &reachAvoid ? reachAvoidCfg.formula : quadrotorCfg.formula;
    Run nominal = horizonRun(f, (*res)->run, (*res)->loopStart);
    // Exact dynamics along the nominal inputs, so only feedback could make a difference.
    Run exact = simulate(sys, nominal.states[0],
                         std::vector<Eigen::VectorXd>(nominal.inputs.begin(),
                                                      nominal.inputs.begin() + (nominal.size() - 1)));
    exact.inputs = nominal.inputs;
    Run exec = track(sys, exact, (*res)->gains, exact.states[0], nullptr, (*res)->loopStart);
    for (size_t k = 0; k < exact.size(); ++k)
      worstTrack = std::max(worstTrack, (exec.states[k] - exact.states[k]).cwiseAbs().maxCoeff() /
                                            std::max(1.0, exact.states[k].cwiseAbs().maxCoeff()));
    ++runs;
  }
  v.require(runs == 2, "missing synthesized runs");
  v.require(worstTrack <= 1e-9, "zero-disturbance tracking off by " + num(worstTrack));
  v.detail << "50 random Riccati recursions symmetric PSD, scalar gains within " << num(worstGain)
           << ", zero-disturbance tracking within " << num(worstTrack) << " on " << runs << " runs";
  return v;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Verdict()> run;
  };
  std::vector<Criterion> criteria{
      {1, "reach-avoid reproduction", reachAvoidReproduction},
      {2, "quadrotor inspection", quadrotorInspection},
      {3, "disturbance tracking", disturbanceTracking},
      {4, "coarse semantics on lasso runs", coarseAgreesWithUnrolled},
      {5, "plan robustness lower bound", planRobustnessLowerBound},
      {6, "discrete planner soundness", plannerSoundness},
      {7, "feasibility search completeness", feasCompleteness},
      {8, "LQR numerics", lqrNumerics},
  };
  int failed = 0;
  for (auto& c : criteria) {
    Verdict v;
    auto t0 = std::chrono::steady_clock::now();
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v.fail(std::string("exception: ") + e.what());
    }
    failed += !v.pass;
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << (v.pass ? "PASS" : "FAIL") << " " << c.id << " " << c.name << ": " << v.detail.str() << " ["
              << num(secs) << " s]" << std::endl;
  }
  return failed;
}
