#include "doctest.h"

#include "stlsynth/robust/robust.hpp"
#include "stlsynth/stl/parser.hpp"

#include <random>

using namespace stlsynth;

namespace {

const std::vector<std::string> kXYU{"x", "y", "vx", "vy"};

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd r(static_cast<int>(v.size()));
  int i = 0;
  for (double d : v) r[i++] = d;
  return r;
}

/// lo_x < x < hi_x, lo_y < y < hi_y over (x, y, inputs...).
Polyhedron box(double lx, double hx, double ly, double hy, int dim) {
  auto e = [&](int i, double s) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(dim);
    c[i] = s;
    return c;
  };
  return Polyhedron({{e(0, 1), -lx}, {e(0, -1), hx}, {e(1, 1), -ly}, {e(1, -1), hy}});
}

StretchedPrefix repeat(const Polyhedron& P, int steps) {
  StretchedPrefix pre;
  for (int k = 0; k <= steps; ++k) {
    pre.polyhedra.push_back(P);
    pre.segment.push_back(0);
    pre.hull.push_back(false);
  }
  return pre;
}

LinearSystem integrator2() {
  LinearSystem s;
  s.A = Eigen::MatrixXd::Identity(2, 2);
  s.B = Eigen::MatrixXd::Identity(2, 2);
  s.stateNames = {"x", "y"};
  s.inputNames = {"vx", "vy"};
  return s;
}

Run run2(std::vector<std::pair<double, double>> xs) {
  Run r;
  for (auto [x, y] : xs) {
    r.states.push_back(vec({x, y}));
    r.inputs.push_back(vec({0, 0}));
  }
  return r;
}

const char* kReachAvoid =
    "safe := (x < 10 | x > 20 | y < 10 | y > 20) & 0 < x < 30 & 0 < y < 30;\n"
    "goal := 20 < x < 30 & 0 < y < 10;\n"
    "safe U[10,60] goal";

}  // namespace

TEST_CASE("plan robustness") {
  CHECK(plan_robustness(repeat(box(0, 10, 0, 10, 4), 0), run2({{5, 5}})) == 5.0);
  CHECK(plan_robustness(repeat(box(0, 10, 0, 10, 4), 1), run2({{5, 5}, {8, 5}})) == 2.0);
  CHECK(plan_robustness(repeat(box(0, 10, 0, 10, 4), 0), run2({{11, 5}})) == -1.0);
  CHECK_THROWS_AS(plan_robustness(repeat(box(0, 10, 0, 10, 4), 1), run2({{5, 5}})), std::invalid_argument);
}

TEST_CASE("robust LP keeps a static system at the center") {
  LinearSystem s;
  s.A = Eigen::MatrixXd::Identity(2, 2);
  s.B = Eigen::MatrixXd::Zero(2, 1);
  s.stateNames = {"x", "y"};
  s.inputNames = {"u"};
  for (auto method : {LpMethod::Simplex, LpMethod::InteriorPoint}) {
    auto r = robust_lp(repeat(box(0, 10, 0, 6, 3), 3), s, vec({5, 3}), 1e-6, method);
    CHECK(r.rho == doctest::Approx(3.0).epsilon(1e-7));
    // Drift is limited by the residual budget.
    for (auto& x : r.run.states) CHECK((x - vec({5, 3})).cwiseAbs().maxCoeff() <= 1e-6 + 1e-12);
  }
}

TEST_CASE("robust LP value equals the recomputed plan robustness") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> c(-5, 5), w(2, 8);
  for (int t = 0; t < 30; ++t) {
    StretchedPrefix pre;
    Eigen::VectorXd x0(2);
    x0 << c(rng), c(rng);
    for (int k = 0; k < 4; ++k) {
      double cx = c(rng), cy = c(rng), wx = w(rng), wy = w(rng);
      if (k == 0) cx = x0[0], cy = x0[1];
      pre.polyhedra.push_back(box(cx - wx, cx + wx, cy - wy, cy + wy, 4));
      pre.segment.push_back(k);
      pre.hull.push_back(false);
    }
    auto r = robust_lp(pre, integrator2(), x0, 1e-6);
    CHECK(r.rho == doctest::Approx(plan_robustness(pre, r.run)).epsilon(1e-6));
    CHECK(dynamicsResidual(integrator2(), r.run) <= 1e-6 + 1e-9);
    // At least as good as the feasibility LP's run on the same constraints.
    auto fe = feasibility_lp(pre, integrator2(), x0, 1e-6);
    if (fe.feasible) CHECK(r.rho >= plan_robustness(pre, fe.run) - 1e-7);
  }
}

TEST_CASE("stretching cannot help a static plan") {
  LinearSystem s;
  s.A = Eigen::MatrixXd::Identity(2, 2);
  s.B = Eigen::MatrixXd::Identity(2, 2);
  Formula f = parse_formula("G[0,4] (0 < x < 10 & 0 < y < 10)", kXYU);
  CoarseRun cr;
  cr.stateDim = 2;
  for (int k = 0; k < 4; ++k) cr.points.push_back(vec({5, 5, 0, 0}));
  cr.loopIndex = 2;
  DiscretePlan plan = makePlan(f, cr);
  Eigen::MatrixXd I = Eigen::MatrixXd::Identity(2, 2);
  auto out = rob(f, plan, {0, 0}, s, vec({5, 5}), I, I, I);
  CHECK(out.stretches == std::vector<int>{0, 0});
  CHECK(out.history.size() == 1);
  CHECK(out.rho == doctest::Approx(5.0).epsilon(1e-7));
  CHECK(out.gains.horizon() == out.prefix.length());
}

TEST_CASE("reach-avoid: robustness grows along the accepted increments") {
  Formula f = parse_formula(kReachAvoid, kXYU);
  DiscretePlanner pl(f, 2, 2, 1.0, vec({5, 5}), openSolver("z3"));
  DplanResult r;
  for (int K = 0; K <= 3 && !r.sat; ++K) r = pl.dplan(K);
  REQUIRE(r.sat);
  auto fr = feas(f, r.plan, integrator2(), vec({5, 5}));
  REQUIRE(fr.feasible);
  double baseline = plan_robustness(fr.prefix, fr.run);

  Eigen::MatrixXd I = Eigen::MatrixXd::Identity(2, 2);
  RobOptions opt;
  auto out = rob(f, r.plan, fr.stretches, integrator2(), vec({5, 5}), 10 * I, I, I, opt);
  REQUIRE(!out.history.empty());
  CHECK(out.history.front() >= baseline - 1e-7);
  for (size_t i = 1; i < out.history.size(); ++i) CHECK(out.history[i] - out.history[i - 1] >= opt.epsilon);
  CHECK(out.rho == out.history.back());
  CHECK(out.rho > baseline);
  CHECK(out.rho == doctest::Approx(plan_robustness(out.prefix, out.run)).epsilon(1e-6));
  for (size_t k = 0; k < 2; ++k) CHECK(out.stretches[k] >= fr.stretches[k]);

  auto again = lqr_gains(integrator2(), 10 * I, I, I, out.prefix.length());
  REQUIRE(again.horizon() == out.gains.horizon());
  for (int k = 0; k < again.horizon(); ++k) CHECK((again.gains[k] - out.gains.gains[k]).norm() == 0.0);
}
