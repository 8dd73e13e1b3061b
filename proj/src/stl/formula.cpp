#include "stlsynth/stl/formula.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace stlsynth {

bool Predicate::operator==(const Predicate& o) const {
  return coeffs.size() == o.coeffs.size() && coeffs == o.coeffs && offset == o.offset;
}

namespace {

std::shared_ptr<const FormulaNode> makeNode(NodeKind kind, Predicate p, Interval iv,
                                            std::vector<Formula> ch) {
  auto n = std::make_shared<FormulaNode>();
  n->kind = kind;
  n->pred = std::move(p);
  n->interval = iv;
  n->children = std::move(ch);
  return n;
}

void checkInterval(const Interval& iv) {
  if (!(iv.a >= 0.0) || !(iv.b >= iv.a) || !std::isfinite(iv.b))
    throw std::invalid_argument("temporal interval must satisfy 0 <= a <= b < inf");
}

void checkChild(const Formula& f) {
  if (!f.valid()) throw std::invalid_argument("empty subformula");
}

}  // namespace

Formula Formula::pred(Predicate p) {
  return Formula(makeNode(NodeKind::Pred, std::move(p), {}, {}));
}

Formula Formula::negPred(Predicate p) {
  return Formula(makeNode(NodeKind::NegPred, std::move(p), {}, {}));
}

Formula Formula::conj(std::vector<Formula> children) {
  if (children.empty()) throw std::invalid_argument("empty conjunction");
  for (auto& c : children) checkChild(c);
  if (children.size() == 1) return children.front();
  return Formula(makeNode(NodeKind::And, {}, {}, std::move(children)));
}

Formula Formula::disj(std::vector<Formula> children) {
  if (children.empty()) throw std::invalid_argument("empty disjunction");
  for (auto& c : children) checkChild(c);
  if (children.size() == 1) return children.front();
  return Formula(makeNode(NodeKind::Or, {}, {}, std::move(children)));
}

Formula Formula::always(Interval iv, Formula f) {
  checkInterval(iv);
  checkChild(f);
  return Formula(makeNode(NodeKind::Always, {}, iv, {std::move(f)}));
}

Formula Formula::eventually(Interval iv, Formula f) {
  checkInterval(iv);
  checkChild(f);
  return Formula(makeNode(NodeKind::Eventually, {}, iv, {std::move(f)}));
}

Formula Formula::until(Interval iv, Formula lhs, Formula rhs) {
  checkInterval(iv);
  checkChild(lhs);
  checkChild(rhs);
  return Formula(makeNode(NodeKind::Until, {}, iv, {std::move(lhs), std::move(rhs)}));
}

NodeKind Formula::kind() const { return node_->kind; }
const std::vector<Formula>& Formula::children() const { return node_->children; }
const Interval& Formula::interval() const { return node_->interval; }
const Predicate& Formula::predicate() const { return node_->pred; }

Predicate Formula::literal() const {
  return kind() == NodeKind::NegPred ? node_->pred.negated() : node_->pred;
}

bool Formula::isTemporal() const {
  auto k = kind();
  return k == NodeKind::Always || k == NodeKind::Eventually || k == NodeKind::Until;
}

Formula Formula::negate() const {
  switch (kind()) {
    case NodeKind::Pred: return negPred(predicate());
    case NodeKind::NegPred: return pred(predicate());
    case NodeKind::And:
    case NodeKind::Or: {
      std::vector<Formula> ch;
      for (auto& c : children()) ch.push_back(c.negate());
      return kind() == NodeKind::And ? disj(std::move(ch)) : conj(std::move(ch));
    }
    case NodeKind::Always: return eventually(interval(), children()[0].negate());
    case NodeKind::Eventually: return always(interval(), children()[0].negate());
    case NodeKind::Until: break;
  }
  throw std::invalid_argument("negation of an until formula is not expressible");
}

bool Formula::operator==(const Formula& o) const {
  if (node_ == o.node_) return true;
  if (!node_ || !o.node_) return false;
  if (kind() != o.kind()) return false;
  if (isAtom()) return predicate() == o.predicate();
  if (isTemporal() && (interval().a != o.interval().a || interval().b != o.interval().b))
    return false;
  if (children().size() != o.children().size()) return false;
  for (size_t i = 0; i < children().size(); ++i)
    if (children()[i] != o.children()[i]) return false;
  return true;
}

StepWindow stepWindow(const Interval& iv, double Ts) {
  // A small guard keeps 0.3/0.1 from flooring to 2.
  constexpr double eps = 1e-9;
  return {static_cast<int>(std::floor(iv.a / Ts + eps)),
          static_cast<int>(std::ceil(iv.b / Ts - eps))};
}

double boundSeconds(const Formula& f) {
  double best = 0.0;
  for (auto& c : f.children()) best = std::max(best, boundSeconds(c));
  return f.isTemporal() ? best + f.interval().b : best;
}

int formula_bound(const Formula& f, double Ts) {
  if (!(Ts > 0)) throw std::invalid_argument("sampling period must be positive");
  return static_cast<int>(std::ceil(boundSeconds(f) / Ts - 1e-9));
}

int horizonSteps(const Formula& f, double Ts) {
  int best = 0;
  for (auto& c : f.children()) best = std::max(best, horizonSteps(c, Ts));
  return f.isTemporal() ? best + stepWindow(f.interval(), Ts).hi : best;
}

FlatFormula::FlatFormula(const Formula& f) {
  std::function<int(const Formula&)> visit = [&](const Formula& g) {
    int id = static_cast<int>(nodes.size());
    nodes.push_back({g.kind(), {}, g.isTemporal() ? g.interval() : Interval{},
                     g.isAtom() ? g.literal() : Predicate{}});
    std::vector<int> ch;
    for (auto& c : g.children()) ch.push_back(visit(c));
    nodes[id].children = std::move(ch);
    return id;
  };
  visit(f);
}

int FlatFormula::dimension() const {
  for (auto& n : nodes)
    if (n.kind == NodeKind::Pred || n.kind == NodeKind::NegPred)
      return static_cast<int>(n.literal.coeffs.size());
  return -1;
}

Predicate normalized(const Predicate& p) {
  double s = p.coeffs.size() ? p.coeffs.cwiseAbs().maxCoeff() : 0.0;
  if (s == 0.0) return p;
  return {p.coeffs / s, p.offset / s};
}

bool sameHalfspace(const Predicate& p, const Predicate& q, double tol) {
  if (p.coeffs.size() != q.coeffs.size()) return false;
  auto a = normalized(p), b = normalized(q);
  return (a.coeffs - b.coeffs).cwiseAbs().maxCoeff() <= tol &&
         std::abs(a.offset - b.offset) <= tol * std::max(1.0, std::abs(a.offset));
}

std::vector<Predicate> atomHalfspaces(const Formula& f) {
  std::vector<Predicate> out;
  FlatFormula flat(f);
  for (auto& n : flat.nodes) {
    if (n.kind != NodeKind::Pred && n.kind != NodeKind::NegPred) continue;
    auto h = normalized(n.literal);
    bool dup = std::any_of(out.begin(), out.end(),
                           [&](const Predicate& q) { return sameHalfspace(q, h); });
    if (!dup) out.push_back(h);
  }
  return out;
}

namespace {

std::string num(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string interval(const char* op, const Interval& iv) {
  return std::string(op) + "[" + num(iv.a) + "," + num(iv.b) + "]";
}

}  // namespace

std::string print(const Predicate& p, const std::vector<std::string>& varNames) {
  std::string s;
  for (int i = 0; i < p.coeffs.size(); ++i) {
    double c = p.coeffs[i];
    if (c == 0.0) continue;
    if (!s.empty()) s += c < 0 ? " - " : " + ";
    else if (c < 0) s += "-";
    s += num(std::abs(c)) + "*" + varNames.at(i);
  }
  if (s.empty()) s = "0";
  if (p.offset != 0.0) s += (p.offset < 0 ? " - " : " + ") + num(std::abs(p.offset));
  return s + " > 0";
}

std::string print(const Formula& f, const std::vector<std::string>& varNames) {
  auto paren = [&](const Formula& g) { return "(" + print(g, varNames) + ")"; };
  switch (f.kind()) {
    case NodeKind::Pred: return "(" + print(f.predicate(), varNames) + ")";
    case NodeKind::NegPred: return "!(" + print(f.predicate(), varNames) + ")";
    case NodeKind::And:
    case NodeKind::Or: {
      std::string s;
      for (auto& c : f.children()) {
        if (!s.empty()) s += f.kind() == NodeKind::And ? " & " : " | ";
        s += paren(c);
      }
      return s;
    }
    case NodeKind::Always: return interval("G", f.interval()) + " " + paren(f.children()[0]);
    case NodeKind::Eventually:
      return interval("F", f.interval()) + " " + paren(f.children()[0]);
    case NodeKind::Until:
      return paren(f.children()[0]) + " " + interval("U", f.interval()) + " " +
             paren(f.children()[1]);
  }
  return {};
}

}  // namespace stlsynth
