#pragma once

#include "stlsynth/abstraction/abstraction.hpp"
#include "stlsynth/smt/solver.hpp"

#include <optional>
#include <string>
#include <vector>

namespace stlsynth {

/// A plan prefix P_0..P_k' shown dynamically infeasible.
/// With a loop index, only plans closing their loop at that index are excluded.
struct Counterexample {
  std::vector<Polyhedron> prefix;
  std::optional<int> loopIndex;
};
using CounterexampleSet = std::vector<Counterexample>;

/// Bounded lasso encoding of a formula over coarse points r_0..r_{K+1}.
///
/// Boolean p_<node>_<j>_<k> states that node holds over the part of its
/// window from anchor k that starts at position j; p_<node>_<j>_<j> is the
/// truth of the node at j. Position constraints (encode_step) are independent
/// of K and stay on the base level; the loop constraints for the current K
/// (encode_loop) close every obligation that reaches past K through the loop
/// L..K and are popped when deepening.
class Encoder {
 public:
  Encoder(const Formula& f, double Ts, int stateDim, int inputDim);

  static std::string var(int node, int j, int k);
  static std::string real(int k, int component);

  /// Declares r_{k'+1} (and r_0 at k' = 0), L at k' = 0, and the Booleans first
  /// used at depth k'.
  void declare_step(int kp, SolverSession& s) const;
  /// p_root_0_0, L > 0 and the state part of r_0 fixed to x_init.
  void encode_initial(const Eigen::VectorXd& xInit, SolverSession& s) const;
  void encode_step(int kp, SolverSession& s) const;
  void encode_loop(int K, SolverSession& s) const;
  void encode_cex(const CounterexampleSet& cexs, SolverSession& s) const;

  /// Number of Booleans declared once depths 0..K are declared.
  size_t booleanCount(int K) const;

  const FlatFormula& flat() const { return flat_; }
  int dimension() const { return n_ + m_; }

 private:
  int windowEnd(int node, int k) const;    ///< last position of the window from anchor k
  int windowStart(int node, int k) const;  ///< first position of the window from anchor k
  std::string linear(const Predicate& h, int k) const;
  std::string loopObligation(int node, int k, int K, int l) const;

  Formula formula_;
  FlatFormula flat_;
  double Ts_;
  int n_, m_;
  std::vector<StepWindow> windows_;
};

struct DplanResult {
  bool sat = false;
  CoarseRun run;
  DiscretePlan plan;
};

/// Incremental discrete planner over a persistent solver session.
class DiscretePlanner {
 public:
  DiscretePlanner(const Formula& f, int stateDim, int inputDim, double Ts, const Eigen::VectorXd& xInit,
                  std::unique_ptr<SmtBackend> backend);

  /// One call per K (0, 1, 2, ...), plus repeated calls at the same K that
  /// bring new counterexamples.
  DplanResult dplan(int K, const CounterexampleSet& newCexs = {});

  int currentK() const { return K_; }
  SolverSession& session() { return session_; }
  const Encoder& encoder() const { return enc_; }
  int checks() const { return checks_; }

 private:
  DplanResult solveAndExtract(int K);

  Formula formula_;
  Encoder enc_;
  SolverSession session_;
  Eigen::VectorXd xInit_;
  double Ts_;
  int K_ = -1;
  int checks_ = 0;
};

/// Extracts the coarse run of a sat session at depth K.
CoarseRun extractCoarseRun(SolverSession& s, int K, int stateDim, int inputDim, double Ts);

}  // namespace stlsynth
