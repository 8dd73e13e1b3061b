#include "stlsynth/abstraction/abstraction.hpp"

#include <json.hpp>

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace stlsynth {

Polyhedron::Polyhedron(std::vector<Halfspace> facets) {
  for (auto& h : facets) add(h);
}

void Polyhedron::add(const Halfspace& h) {
  if (h.coeffs.size() == 0 || h.coeffs.isZero(0.0))
    throw std::invalid_argument("halfspace needs a non-zero coefficient vector");
  if (!hasFacet(h)) facets_.push_back(normalized(h));
}

bool Polyhedron::hasFacet(const Halfspace& h) const {
  return std::any_of(facets_.begin(), facets_.end(),
                     [&](const Halfspace& f) { return sameHalfspace(f, h); });
}

bool Polyhedron::operator==(const Polyhedron& o) const {
  if (facets_.size() != o.facets_.size()) return false;
  return std::all_of(facets_.begin(), facets_.end(), [&](const Halfspace& h) { return o.hasFacet(h); });
}

bool contains(const Polyhedron& p, const Eigen::VectorXd& point) {
  for (auto& h : p.facets())
    if (!(h.value(point) > 0)) return false;
  return true;
}

bool containsRelaxed(const Polyhedron& p, const Eigen::VectorXd& point, double tol) {
  for (auto& h : p.facets())
    if (!(h.value(point) >= -tol)) return false;
  return true;
}

double minFacetValue(const Polyhedron& p, const Eigen::VectorXd& point) {
  double v = std::numeric_limits<double>::infinity();
  for (auto& h : p.facets()) v = std::min(v, h.value(point));
  return v;
}

std::vector<Predicate> label(const Formula& f, const Eigen::VectorXd& point) {
  std::vector<Predicate> out;
  for (auto& h : atomHalfspaces(f)) {
    if (h.coeffs.size() != point.size()) throw std::invalid_argument("point dimension mismatch");
    if (h.value(point) > 0) out.push_back(h);
  }
  return out;
}

Polyhedron abstract_state(const Formula& f, const Eigen::VectorXd& point) {
  return Polyhedron(label(f, point));
}

Polyhedron hull_step(const Formula& f, const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  std::vector<Halfspace> shared;
  for (auto& h : atomHalfspaces(f)) {
    if (h.coeffs.size() != p.size() || h.coeffs.size() != q.size())
      throw std::invalid_argument("point dimension mismatch");
    if (h.value(p) > 0 && h.value(q) > 0) shared.push_back(h);
  }
  return Polyhedron(std::move(shared));
}

DiscretePlan makePlan(const Formula& f, const CoarseRun& cr) {
  DiscretePlan plan;
  for (int k = 0; k <= cr.K(); ++k) plan.steps.push_back(abstract_state(f, cr.points[k]));
  plan.loopIndex = cr.loopIndex;
  plan.stretches.assign(cr.K(), 0);
  plan.source = cr;
  return plan;
}

std::string planToJson(const DiscretePlan& plan) {
  using nlohmann::json;
  json steps = json::array();
  for (auto& P : plan.steps) {
    json facets = json::array();
    for (auto& h : P.facets()) {
      json row = json::array();
      for (int i = 0; i < h.coeffs.size(); ++i) row.push_back(h.coeffs[i] + 0.0);
      row.push_back(h.offset + 0.0);
      facets.push_back(row);
    }
    steps.push_back(facets);
  }
  json j;
  j["steps"] = steps;
  j["loop_index"] = plan.loopIndex;
  j["stretches"] = plan.stretches;
  return j.dump(2) + "\n";
}

}  // namespace stlsynth
