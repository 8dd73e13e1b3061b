#pragma once

#include <Eigen/Dense>

#include <memory>
#include <string>
#include <vector>

namespace stlsynth {

/// Affine predicate f(r) = h'r + a, satisfied when f(r) > 0.
struct Predicate {
  Eigen::VectorXd coeffs;
  double offset = 0.0;

  double value(const Eigen::VectorXd& r) const { return coeffs.dot(r) + offset; }
  Predicate negated() const { return {-coeffs, -offset}; }
  bool operator==(const Predicate& o) const;
};

enum class NodeKind { Pred, NegPred, And, Or, Always, Eventually, Until };

struct Interval {
  double a = 0.0;
  double b = 0.0;
};

struct FormulaNode;

/// Immutable formula tree in negation normal form. Copies share structure.
class Formula {
 public:
  Formula() = default;

  static Formula pred(Predicate p);
  static Formula negPred(Predicate p);
  static Formula conj(std::vector<Formula> children);
  static Formula disj(std::vector<Formula> children);
  static Formula always(Interval iv, Formula f);
  static Formula eventually(Interval iv, Formula f);
  static Formula until(Interval iv, Formula lhs, Formula rhs);

  NodeKind kind() const;
  const std::vector<Formula>& children() const;
  const Interval& interval() const;
  /// Predicate as written; for NegPred the node holds when this predicate is negative.
  const Predicate& predicate() const;
  /// Halfspace that must be positive for the atom to hold (negated for NegPred).
  Predicate literal() const;

  bool isAtom() const { return kind() == NodeKind::Pred || kind() == NodeKind::NegPred; }
  bool isTemporal() const;
  bool valid() const { return node_ != nullptr; }
  const FormulaNode* id() const { return node_.get(); }

  /// Logical negation pushed down to predicates. Until has no dual in the
  /// fragment and throws.
  Formula negate() const;

  bool operator==(const Formula& o) const;
  bool operator!=(const Formula& o) const { return !(*this == o); }

 private:
  explicit Formula(std::shared_ptr<const FormulaNode> n) : node_(std::move(n)) {}
  std::shared_ptr<const FormulaNode> node_;
};

struct FormulaNode {
  NodeKind kind;
  Predicate pred;
  Interval interval;
  std::vector<Formula> children;
};

/// Discretized window [floor(a/Ts), ceil(b/Ts)] in steps.
struct StepWindow {
  int lo = 0;
  int hi = 0;
};
StepWindow stepWindow(const Interval& iv, double Ts);

/// Maximum over root-to-leaf paths of summed interval upper bounds, in seconds.
double boundSeconds(const Formula& f);

/// ceil(boundSeconds / Ts).
int formula_bound(const Formula& f, double Ts);

/// Maximum over paths of summed discretized upper bounds; the largest index
/// offset any evaluation from step k can reach is k + horizonSteps.
int horizonSteps(const Formula& f, double Ts);

/// Flattened pre-order view of a formula: node ids, child ids, atoms.
struct FlatFormula {
  struct Node {
    NodeKind kind;
    std::vector<int> children;
    Interval interval;
    Predicate literal;  ///< atoms only
  };
  std::vector<Node> nodes;  ///< nodes[0] is the root; children have larger ids
  explicit FlatFormula(const Formula& f);
  int dimension() const;  ///< predicate dimension, -1 if there are no atoms
};

/// Distinct atom halfspaces of f after normalization (see normalized()).
std::vector<Predicate> atomHalfspaces(const Formula& f);

/// Scale so the largest-magnitude coefficient is +-1.
Predicate normalized(const Predicate& p);
bool sameHalfspace(const Predicate& p, const Predicate& q, double tol = 1e-12);

std::string print(const Formula& f, const std::vector<std::string>& varNames);
std::string print(const Predicate& p, const std::vector<std::string>& varNames);

}  // namespace stlsynth
