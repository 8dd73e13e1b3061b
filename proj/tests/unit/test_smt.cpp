#include "doctest.h"
#include "oracle.hpp"

#include "stlsynth/smt/encoding.hpp"
#include "stlsynth/stl/parser.hpp"

#include <random>
#include <set>

using namespace stlsynth;

namespace {

const std::vector<std::string> kX{"x"};
const std::vector<std::string> kXYU{"x", "y", "vx", "vy"};

SolverSession fresh() { return SolverSession(openSolver("z3")); }

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd r(static_cast<int>(v.size()));
  int i = 0;
  for (double d : v) r[i++] = d;
  return r;
}

int treeSize(const Formula& f) {
  int n = 1;
  for (auto& c : f.children()) n += treeSize(c);
  return n;
}

/// All constraints at depth K asserted into a new process at once.
std::string solveFresh(const Formula& f, int n, int m, const Eigen::VectorXd& x0, int K) {
  Encoder enc(f, 1.0, n, m);
  SolverSession s = fresh();
  for (int k = 0; k <= K; ++k) enc.declare_step(k, s);
  enc.encode_initial(x0, s);
  for (int k = 0; k <= K; ++k) enc.encode_step(k, s);
  s.push();
  enc.encode_loop(K, s);
  return s.check();
}

const char* kReachAvoid =
    "safe := (x < 10 | x > 20 | y < 10 | y > 20) & 0 < x < 30 & 0 < y < 30;\n"
    "goal := 20 < x < 30 & 0 < y < 10;\n"
    "safe U[10,60] goal";

}  // namespace

TEST_CASE("get-value parsing") {
  auto v = parseValues("((x 1.5) (y (- 2.0)) (z (/ 1.0 4.0)) (w (- (/ 3.0 2.0))) (L 2))");
  CHECK(v.at("x") == 1.5);
  CHECK(v.at("y") == -2.0);
  CHECK(v.at("z") == 0.25);
  CHECK(v.at("w") == -1.5);
  CHECK(v.at("L") == 2.0);
  CHECK_THROWS_AS(parseValues("(x"), SmtError);
}

TEST_CASE("session stack") {
  SolverSession s = fresh();
  s.declare("a", Sort::Real);
  CHECK_THROWS_AS(s.declare("a", Sort::Real), SmtError);
  s.assertTerm("(> a 1.0)");
  CHECK(s.check() == "sat");
  s.push();
  CHECK(s.depth() == 1);
  CHECK_THROWS_AS(s.declare("b", Sort::Real), SmtError);
  s.assertTerm("(< a 0.0)");
  CHECK(s.check() == "unsat");
  s.pop();
  CHECK(s.depth() == 0);
  CHECK_THROWS_AS(s.pop(), SmtError);
  CHECK(s.check() == "sat");
  CHECK(s.values({"a"}).at("a") > 1.0);
}

TEST_CASE("missing solver binary is reported") {
  CHECK_THROWS_AS(SolverSession(std::make_unique<SmtProcess>(std::vector<std::string>{"/nonexistent/solver"})),
                  SmtError);
}

TEST_CASE("domain constraints of G[6,8] x > 0 at step 0") {
  Formula f = parse_formula("G[6,8] x > 0", kX);
  Encoder enc(f, 1.0, 1, 0);
  SolverSession s = fresh();
  enc.declare_step(0, s);
  enc.encode_step(0, s);
  // One implication for the G anchor at 0 passing on to step 1, one for the atom.
  REQUIRE(s.log().size() == 2);
  CHECK(s.log()[0].second == "(=> p_0_0_0 p_0_1_0)");
  CHECK(s.log()[1].second == "(=> p_1_0_0 (and (> (+ r_0_0 0.0) 0.0) (> (+ r_1_0 0.0) 0.0)))");
}

TEST_CASE("atomic predicate at step 0") {
  Formula f = parse_formula("x > 2", kX);
  Encoder enc(f, 1.0, 1, 0);
  SolverSession s = fresh();
  enc.declare_step(0, s);
  enc.encode_step(0, s);
  REQUIRE(s.log().size() == 1);
  CHECK(s.log()[0].second == "(=> p_0_0_0 (and (> (+ r_0_0 (- 2.0)) 0.0) (> (+ r_1_0 (- 2.0)) 0.0)))");
}

TEST_CASE("loop constraints of G[6,8] x > 0 at K = 2") {
  Formula f = parse_formula("G[6,8] x > 0", kX);
  Encoder enc(f, 1.0, 1, 0);
  SolverSession s = fresh();
  for (int k = 0; k <= 2; ++k) enc.declare_step(k, s);
  for (int k = 0; k <= 2; ++k) enc.encode_step(k, s);
  size_t base = s.log().size();
  s.push();
  enc.encode_loop(2, s);
  std::vector<std::string> loop;
  for (size_t i = base; i < s.log().size(); ++i) {
    CHECK(s.log()[i].first == 1);
    loop.push_back(s.log()[i].second);
  }
  // Closure for L = 1 and L = 2, then one obligation per anchor 0, 1, 2.
  REQUIRE(loop.size() == 5);
  CHECK(loop[0] == "(=> (= L 1) (and (= r_2_0 r_0_0) (= r_3_0 r_1_0)))");
  CHECK(loop[1] == "(=> (= L 2) (and (= r_2_0 r_1_0) (= r_3_0 r_2_0)))");
  for (int k = 0; k < 3; ++k) {
    const std::string& a = loop[2 + k];
    CHECK(a.rfind("(=> p_0_3_" + std::to_string(k), 0) == 0);
    CHECK(a.find("(<= L 2)") != std::string::npos);
    // With L = 2 the loop is the single position 2.
    CHECK(a.find("(=> (= L 2) p_1_2_2)") != std::string::npos);
    // With L = 1 the loop is 1, 2 and the window covers both.
    auto p1 = a.find("(=> (= L 1) (and ");
    REQUIRE(p1 != std::string::npos);
    std::string l1 = a.substr(p1, a.find("))", p1) - p1);
    CHECK(l1.find("p_1_1_1") != std::string::npos);
    CHECK(l1.find("p_1_2_2") != std::string::npos);
  }
}

TEST_CASE("no temporal operators: only loop closure") {
  Formula f = parse_formula("x > 0 & x < 3", kX);
  Encoder enc(f, 1.0, 1, 0);
  SolverSession s = fresh();
  for (int k = 0; k <= 3; ++k) enc.declare_step(k, s);
  size_t base = s.log().size();
  s.push();
  enc.encode_loop(3, s);
  CHECK(s.log().size() - base == 3);
  for (size_t i = base; i < s.log().size(); ++i) CHECK(s.log()[i].second.rfind("(=> (= L ", 0) == 0);
}

TEST_CASE("Boolean budget and unique names") {
  std::mt19937_64 rng(5);
  oracle::FormulaGen gen{rng, 1};
  for (int t = 0; t < 10; ++t) {
    Formula f = gen(3);
    Encoder enc(f, 1.0, 1, 0);
    SolverSession s = fresh();  // duplicate declarations would throw
    const int nodes = treeSize(f);
    for (int K = 0; K <= 5; ++K) {
      enc.declare_step(K, s);
      CHECK(s.count(Sort::Bool) == enc.booleanCount(K));
      CHECK(enc.booleanCount(K) <= static_cast<size_t>(nodes * (K + 1) * (K + 1) + nodes * (K + 1)));
      CHECK(enc.flat().nodes.size() <= static_cast<size_t>(nodes));
    }
    CHECK(s.count(Sort::Int) == 1);
    CHECK(s.count(Sort::Real) == 7);
  }
}

TEST_CASE("reach-avoid planning") {
  Formula f = parse_formula(kReachAvoid, kXYU);
  DiscretePlanner pl(f, 2, 2, 1.0, vec({5, 5}), openSolver("z3"));
  CHECK(!pl.dplan(0).sat);
  CHECK(!pl.dplan(1).sat);
  auto r = pl.dplan(2);
  REQUIRE(r.sat);
  CHECK(r.plan.K() == 2);
  CHECK(r.plan.loopIndex == 2);
  CHECK(contains(r.plan.steps[2], vec({25, 5, 0, 0})));
  CHECK(r.run.points[0].head(2) == vec({5, 5}));
  CHECK(coarse_satisfies(f, r.run));
  CHECK_THROWS_AS(pl.dplan(2), std::logic_error);
  CHECK_THROWS_AS(pl.dplan(4), std::logic_error);

  // Excluding this plan moves the next model away from it.
  Counterexample cex{r.plan.steps, r.plan.loopIndex};
  auto r2 = pl.dplan(2, {cex});
  if (r2.sat) {
    bool escaped = r2.plan.loopIndex != r.plan.loopIndex;
    for (int k = 0; k <= 2; ++k) escaped = escaped || !contains(r.plan.steps[k], r2.run.points[k]);
    CHECK(escaped);
    CHECK(coarse_satisfies(f, r2.run));
  }
}

TEST_CASE("a whole-space counterexample blocks everything") {
  Formula f = parse_formula("F[0,2] x > 1", kX);
  DiscretePlanner pl(f, 1, 0, 1.0, vec({0}), openSolver("z3"));
  auto r = pl.dplan(0, {Counterexample{{Polyhedron{}}, std::nullopt}});
  CHECK(!r.sat);
  for (int K = 1; K <= 3; ++K) CHECK(!pl.dplan(K).sat);
}

TEST_CASE("eventually before the window opens needs a short loop") {
  // F[10,60] x > 1 at K = 3: the only way to reach step 10 is through the loop,
  // and the loop must visit x > 1.
  Formula f = parse_formula("F[10,60] x > 1", kX);
  DiscretePlanner pl(f, 1, 0, 1.0, vec({0}), openSolver("z3"));
  for (int K = 0; K < 3; ++K) pl.dplan(K);
  std::vector<Counterexample> cexs;
  for (int round = 0; round < 6; ++round) {
    auto r = round == 0 ? pl.dplan(3) : pl.dplan(3, cexs);
    if (!r.sat) break;
    CHECK(r.run.hasLoop());
    bool visits = false;
    for (int j = r.run.loopIndex; j <= 3; ++j)
      visits = visits || (r.run.points[j][0] > 1 && r.run.points[j + 1][0] > 1);
    CHECK(visits);
    cexs = {Counterexample{r.plan.steps, r.plan.loopIndex}};
  }
}

TEST_CASE("incremental and fresh sessions agree") {
  std::mt19937_64 rng(41);
  oracle::FormulaGen gen{rng, 2, 3};
  for (int t = 0; t < 12; ++t) {
    Formula f = gen(3);
    Eigen::VectorXd x0 = oracle::randomPoint(rng, 1);
    DiscretePlanner pl(f, 1, 1, 1.0, x0, openSolver("z3"));
    for (int K = 0; K <= 6; ++K) {
      bool inc = pl.dplan(K).sat;
      CHECK(inc == (solveFresh(f, 1, 1, x0, K) == "sat"));
    }
  }
}
