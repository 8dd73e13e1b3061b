#include "stlsynth/smt/encoding.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace stlsynth {

namespace {

std::string decimal(double v) {
  if (!std::isfinite(v)) throw SmtError("non-finite coefficient in encoding");
  char buf[512];
  auto res = std::to_chars(buf, buf + sizeof buf, std::abs(v), std::chars_format::fixed);
  std::string s(buf, res.ptr);
  if (s.find('.') == std::string::npos) s += ".0";
  return v < 0 ? "(- " + s + ")" : s;
}

std::string nary(const char* op, std::vector<std::string> terms, const char* unit,
                 const char* absorbing) {
  std::vector<std::string> kept;
  for (auto& t : terms) {
    if (t == absorbing) return absorbing;
    if (t != unit) kept.push_back(std::move(t));
  }
  if (kept.empty()) return unit;
  if (kept.size() == 1) return kept[0];
  std::string s = std::string("(") + op;
  for (auto& t : kept) s += " " + t;
  return s + ")";
}

std::string mkAnd(std::vector<std::string> t) { return nary("and", std::move(t), "true", "false"); }
std::string mkOr(std::vector<std::string> t) { return nary("or", std::move(t), "false", "true"); }

std::string mkImplies(const std::string& a, const std::string& b) {
  if (a == "false" || b == "true") return "true";
  if (a == "true") return b;
  if (b == "false") return "(not " + a + ")";
  return "(=> " + a + " " + b + ")";
}

}  // namespace

Encoder::Encoder(const Formula& f, double Ts, int stateDim, int inputDim)
    : formula_(f), flat_(f), Ts_(Ts), n_(stateDim), m_(inputDim) {
  if (!(Ts > 0)) throw std::invalid_argument("sampling period must be positive");
  int dim = flat_.dimension();
  if (dim >= 0 && dim != n_ + m_) throw std::invalid_argument("formula dimension does not match the system");
  for (auto& node : flat_.nodes)
    windows_.push_back(node.kind == NodeKind::Always || node.kind == NodeKind::Eventually ||
                               node.kind == NodeKind::Until
                           ? stepWindow(node.interval, Ts)
                           : StepWindow{});
}

std::string Encoder::var(int node, int j, int k) {
  return "p_" + std::to_string(node) + "_" + std::to_string(j) + "_" + std::to_string(k);
}

std::string Encoder::real(int k, int component) {
  return "r_" + std::to_string(k) + "_" + std::to_string(component);
}

int Encoder::windowStart(int node, int k) const { return k + windows_[node].lo; }
int Encoder::windowEnd(int node, int k) const { return k + windows_[node].hi; }

namespace {
bool temporal(NodeKind k) {
  return k == NodeKind::Always || k == NodeKind::Eventually || k == NodeKind::Until;
}
}  // namespace

void Encoder::declare_step(int kp, SolverSession& s) const {
  const int dim = n_ + m_;
  if (kp == 0) {
    s.declare("L", Sort::Int);
    for (int i = 0; i < dim; ++i) s.declare(real(0, i), Sort::Real);
  }
  for (int i = 0; i < dim; ++i) s.declare(real(kp + 1, i), Sort::Real);
  for (int id = 0; id < static_cast<int>(flat_.nodes.size()); ++id) {
    s.declare(var(id, kp, kp), Sort::Bool);
    if (!temporal(flat_.nodes[id].kind)) continue;
    for (int k = 0; k <= kp; ++k)
      if (kp + 1 <= windowEnd(id, k)) s.declare(var(id, kp + 1, k), Sort::Bool);
  }
}

size_t Encoder::booleanCount(int K) const {
  size_t c = 0;
  for (int id = 0; id < static_cast<int>(flat_.nodes.size()); ++id) {
    if (!temporal(flat_.nodes[id].kind)) {
      c += static_cast<size_t>(K + 1);
      continue;
    }
    for (int k = 0; k <= K; ++k) c += static_cast<size_t>(std::min(K + 1, windowEnd(id, k)) - k + 1);
  }
  return c;
}

std::string Encoder::linear(const Predicate& h, int k) const {
  std::vector<std::string> terms;
  for (int i = 0; i < h.coeffs.size(); ++i) {
    double c = h.coeffs[i];
    if (c == 0.0) continue;
    terms.push_back(c == 1.0 ? real(k, i) : "(* " + decimal(c) + " " + real(k, i) + ")");
  }
  terms.push_back(decimal(h.offset));
  std::string s = "(+";
  for (auto& t : terms) s += " " + t;
  return s + ")";
}

void Encoder::encode_initial(const Eigen::VectorXd& xInit, SolverSession& s) const {
  if (xInit.size() != n_) throw std::invalid_argument("initial state dimension mismatch");
  std::vector<std::string> parts{var(0, 0, 0), "(> L 0)"};
  for (int i = 0; i < n_; ++i) parts.push_back("(= " + real(0, i) + " " + decimal(xInit[i]) + ")");
  for (auto& p : parts) s.assertTerm(p);
}

void Encoder::encode_step(int kp, SolverSession& s) const {
  for (int id = 0; id < static_cast<int>(flat_.nodes.size()); ++id) {
    const auto& node = flat_.nodes[id];
    const std::string self = var(id, kp, kp);
    switch (node.kind) {
      case NodeKind::Pred:
      case NodeKind::NegPred:
        s.assertTerm(mkImplies(self, mkAnd({"(> " + linear(node.literal, kp) + " 0.0)",
                                            "(> " + linear(node.literal, kp + 1) + " 0.0)"})));
        break;
      case NodeKind::And:
      case NodeKind::Or: {
        std::vector<std::string> ch;
        for (int c : node.children) ch.push_back(var(c, kp, kp));
        s.assertTerm(mkImplies(self, node.kind == NodeKind::And ? mkAnd(ch) : mkOr(ch)));
        break;
      }
      default:
        for (int k = 0; k <= kp; ++k) {
          const int st = windowStart(id, k), en = windowEnd(id, k);
          if (kp > en) continue;
          const std::string link = var(id, kp, k);
          const std::string next = kp < en ? var(id, kp + 1, k) : "false";
          const bool inWindow = kp >= st;
          std::string body;
          if (node.kind == NodeKind::Always) {
            body = mkAnd({inWindow ? var(node.children[0], kp, kp) : "true", kp >= en ? "true" : next});
          } else if (node.kind == NodeKind::Eventually) {
            body = mkOr({inWindow ? var(node.children[0], kp, kp) : "false", next});
          } else {
            body = mkAnd({var(node.children[0], kp, kp),
                          mkOr({inWindow ? var(node.children[1], kp, kp) : "false", next})});
          }
          s.assertTerm(mkImplies(link, body));
        }
    }
  }
}

std::string Encoder::loopObligation(int node, int k, int K, int l) const {
  const auto& nd = flat_.nodes[node];
  const int p = K - l + 1;
  const int t0 = std::max(0, windowStart(node, k) - (K + 1));
  const int t1 = windowEnd(node, k) - (K + 1);
  auto pos = [&](int t) { return l + t % p; };
  std::vector<std::string> terms;
  if (nd.kind == NodeKind::Always || nd.kind == NodeKind::Eventually) {
    for (int t = t0; t <= std::min(t1, t0 + p - 1); ++t) terms.push_back(var(nd.children[0], pos(t), pos(t)));
    return nd.kind == NodeKind::Always ? mkAnd(terms) : mkOr(terms);
  }
  // Until: from t >= p-1 on, the psi1 prefix covers the whole loop and the
  // candidates repeat with period p.
  const int tEnd = std::min(t1, std::max(t0, p - 1) + p - 1);
  for (int t = t0; t <= tEnd; ++t) {
    std::vector<std::string> c{var(nd.children[1], pos(t), pos(t))};
    for (int u = 0; u <= std::min(t, p - 1); ++u) c.push_back(var(nd.children[0], pos(u), pos(u)));
    terms.push_back(mkAnd(c));
  }
  return mkOr(terms);
}

void Encoder::encode_loop(int K, SolverSession& s) const {
  const int dim = n_ + m_;
  for (int l = 1; l <= K; ++l) {
    std::vector<std::string> eq;
    for (int i = 0; i < dim; ++i) {
      eq.push_back("(= " + real(K, i) + " " + real(l - 1, i) + ")");
      eq.push_back("(= " + real(K + 1, i) + " " + real(l, i) + ")");
    }
    s.assertTerm(mkImplies("(= L " + std::to_string(l) + ")", mkAnd(eq)));
  }
  for (int id = 0; id < static_cast<int>(flat_.nodes.size()); ++id) {
    if (!temporal(flat_.nodes[id].kind)) continue;
    for (int k = 0; k <= K; ++k) {
      if (K + 1 > windowEnd(id, k)) continue;
      std::vector<std::string> cases{K >= 1 ? "(<= L " + std::to_string(K) + ")" : "false"};
      for (int l = 1; l <= K; ++l)
        cases.push_back(mkImplies("(= L " + std::to_string(l) + ")", loopObligation(id, k, K, l)));
      s.assertTerm(mkImplies(var(id, K + 1, k), mkAnd(cases)));
    }
  }
}

void Encoder::encode_cex(const CounterexampleSet& cexs, SolverSession& s) const {
  for (auto& cex : cexs) {
    if (cex.prefix.empty()) throw std::invalid_argument("empty counterexample");
    std::vector<std::string> escape;
    for (int k = 0; k < static_cast<int>(cex.prefix.size()); ++k)
      for (auto& h : cex.prefix[k].facets()) escape.push_back("(<= " + linear(h, k) + " 0.0)");
    if (cex.loopIndex) escape.push_back("(not (= L " + std::to_string(*cex.loopIndex) + "))");
    s.assertTerm(mkOr(escape));
  }
}

CoarseRun extractCoarseRun(SolverSession& s, int K, int stateDim, int inputDim, double Ts) {
  const int dim = stateDim + inputDim;
  std::vector<std::string> names{"L"};
  for (int k = 0; k <= K + 1; ++k)
    for (int i = 0; i < dim; ++i) names.push_back(Encoder::real(k, i));
  auto vals = s.values(names);
  CoarseRun cr;
  cr.Ts = Ts;
  cr.stateDim = stateDim;
  for (int k = 0; k <= K + 1; ++k) {
    Eigen::VectorXd r(dim);
    for (int i = 0; i < dim; ++i) r[i] = vals.at(Encoder::real(k, i));
    cr.points.push_back(r);
  }
  int L = static_cast<int>(std::lround(vals.at("L")));
  cr.loopIndex = std::min(L, K + 1);
  return cr;
}

DiscretePlanner::DiscretePlanner(const Formula& f, int stateDim, int inputDim, double Ts,
                                 const Eigen::VectorXd& xInit, std::unique_ptr<SmtBackend> backend)
    : formula_(f), enc_(f, Ts, stateDim, inputDim), session_(std::move(backend)), xInit_(xInit), Ts_(Ts) {
  if (xInit.size() != stateDim) throw std::invalid_argument("initial state dimension mismatch");
}

DplanResult DiscretePlanner::dplan(int K, const CounterexampleSet& newCexs) {
  if (K == 0 && K_ == -1) {
    enc_.declare_step(0, session_);
    enc_.encode_initial(xInit_, session_);
    enc_.encode_step(0, session_);
    enc_.encode_cex(newCexs, session_);
  } else if (K == K_ && K_ >= 0) {
    if (newCexs.empty()) throw std::logic_error("dplan repeated at the same depth without new counterexamples");
    session_.pop();
    enc_.encode_cex(newCexs, session_);
  } else if (K == K_ + 1 && K_ >= 0) {
    session_.pop();
    enc_.declare_step(K, session_);
    enc_.encode_step(K, session_);
    enc_.encode_cex(newCexs, session_);
  } else {
    throw std::logic_error("dplan depth must start at 0 and grow by one (got " + std::to_string(K) +
                           " after " + std::to_string(K_) + ")");
  }
  K_ = K;
  session_.push();
  enc_.encode_loop(K, session_);
  return solveAndExtract(K);
}

DplanResult DiscretePlanner::solveAndExtract(int K) {
  ++checks_;
  std::string r = session_.check();
  DplanResult res;
  if (r == "unknown") throw SmtError("solver returned unknown");
  if (r == "unsat") return res;
  res.sat = true;
  res.run = extractCoarseRun(session_, K, static_cast<int>(xInit_.size()),
                             enc_.dimension() - static_cast<int>(xInit_.size()), Ts_);
  res.plan = makePlan(formula_, res.run);
  return res;
}

}  // namespace stlsynth
