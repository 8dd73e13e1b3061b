#pragma once

#include "stlsynth/stl/formula.hpp"
#include "stlsynth/stl/semantics.hpp"

#include <string>
#include <vector>

namespace stlsynth {

using Halfspace = Predicate;

/// Conjunction of open halfspaces h'r + a > 0. No facets means the whole space.
class Polyhedron {
 public:
  Polyhedron() = default;
  explicit Polyhedron(std::vector<Halfspace> facets);

  /// Adds a facet unless an equal one (after normalization) is present.
  void add(const Halfspace& h);
  const std::vector<Halfspace>& facets() const { return facets_; }
  bool isWholeSpace() const { return facets_.empty(); }
  bool hasFacet(const Halfspace& h) const;
  bool operator==(const Polyhedron& o) const;

 private:
  std::vector<Halfspace> facets_;
};

bool contains(const Polyhedron& p, const Eigen::VectorXd& point);
/// Closed containment with slack: every facet value >= -tol.
bool containsRelaxed(const Polyhedron& p, const Eigen::VectorXd& point, double tol);
/// Smallest facet value at the point (+inf for the whole space).
double minFacetValue(const Polyhedron& p, const Eigen::VectorXd& point);

/// Distinct atom halfspaces of f that are positive at the point.
std::vector<Predicate> label(const Formula& f, const Eigen::VectorXd& point);
Polyhedron abstract_state(const Formula& f, const Eigen::VectorXd& point);
/// Halfspaces shared by the labels of both points.
Polyhedron hull_step(const Formula& f, const Eigen::VectorXd& p, const Eigen::VectorXd& q);

/// Abstracted coarse run: P_k = alpha(r~_k), k = 0..K.
struct DiscretePlan {
  std::vector<Polyhedron> steps;
  int loopIndex = 1;
  std::vector<int> stretches;  ///< l_1..l_K; l_i inserts hull steps between P_{i-1} and P_i
  CoarseRun source;

  int K() const { return static_cast<int>(steps.size()) - 1; }
  bool hasLoop() const { return loopIndex <= K(); }
};

DiscretePlan makePlan(const Formula& f, const CoarseRun& cr);

std::string planToJson(const DiscretePlan& plan);

}  // namespace stlsynth
