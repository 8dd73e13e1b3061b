#include "stlsynth/stl/semantics.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

namespace stlsynth {

namespace {
constexpr double kBottom = -std::numeric_limits<double>::infinity();
}

void CoarseRun::validate() const {
  if (points.size() < 2) throw std::invalid_argument("coarse run needs at least two points");
  if (loopIndex < 1) throw std::invalid_argument("loop index must be at least 1");
  if (!(Ts > 0)) throw std::invalid_argument("sampling period must be positive");
  for (auto& p : points)
    if (p.size() != points[0].size()) throw std::invalid_argument("coarse run dimension mismatch");
  if (hasLoop()) {
    int K = this->K(), L = loopIndex;
    double scale = 1.0 + points[L].cwiseAbs().maxCoeff() + points[L - 1].cwiseAbs().maxCoeff();
    if ((points[K] - points[L - 1]).cwiseAbs().maxCoeff() > 1e-9 * scale ||
        (points[K + 1] - points[L]).cwiseAbs().maxCoeff() > 1e-9 * scale)
      throw std::invalid_argument("coarse run loop is not closed");
  }
}

std::optional<int> Lasso::fold(long j) const {
  if (j < 0) return std::nullopt;
  if (j <= last) return static_cast<int>(j);
  if (!loopStart) return std::nullopt;
  long p = period();
  return static_cast<int>(*loopStart + (j - *loopStart) % p);
}

namespace {

/// out[q] = extreme of ext over [q+lo, q+hi], q = 0..count-1.
std::vector<double> slidingExtreme(const std::vector<double>& ext, int lo, int hi, int count,
                                   bool takeMax) {
  std::vector<double> out(count);
  std::deque<int> dq;
  int nextIn = lo;
  auto better = [&](double a, double b) { return takeMax ? a >= b : a <= b; };
  for (int q = 0; q < count; ++q) {
    int wEnd = std::min<int>(q + hi, static_cast<int>(ext.size()) - 1);
    for (; nextIn <= wEnd; ++nextIn) {
      while (!dq.empty() && better(ext[nextIn], ext[dq.back()])) dq.pop_back();
      dq.push_back(nextIn);
    }
    while (!dq.empty() && dq.front() < q + lo) dq.pop_front();
    out[q] = dq.empty() ? kBottom : ext[dq.front()];
  }
  return out;
}

}  // namespace

std::vector<std::vector<double>> evaluateNodes(const FlatFormula& flat, double Ts, const Lasso& lasso,
                                               const std::function<double(int, int)>& atom,
                                               bool boolean) {
  const int count = lasso.last + 1;
  std::vector<std::vector<double>> val(flat.nodes.size());

  auto extend = [&](const std::vector<double>& v, int hi) {
    std::vector<double> ext(static_cast<size_t>(count) + hi);
    for (size_t j = 0; j < ext.size(); ++j) {
      auto p = lasso.fold(static_cast<long>(j));
      ext[j] = p ? v[*p] : kBottom;
    }
    return ext;
  };

  for (int id = static_cast<int>(flat.nodes.size()) - 1; id >= 0; --id) {
    const auto& n = flat.nodes[id];
    auto& out = val[id];
    out.assign(count, 0.0);
    switch (n.kind) {
      case NodeKind::Pred:
      case NodeKind::NegPred:
        for (int q = 0; q < count; ++q) out[q] = atom(id, q);
        break;
      case NodeKind::And:
      case NodeKind::Or: {
        bool isAnd = n.kind == NodeKind::And;
        for (int q = 0; q < count; ++q) {
          double acc = isAnd ? std::numeric_limits<double>::infinity() : kBottom;
          for (int c : n.children) acc = isAnd ? std::min(acc, val[c][q]) : std::max(acc, val[c][q]);
          out[q] = acc;
        }
        break;
      }
      case NodeKind::Always:
      case NodeKind::Eventually: {
        auto w = stepWindow(n.interval, Ts);
        auto ext = extend(val[n.children[0]], w.hi);
        out = slidingExtreme(ext, w.lo, w.hi, count, n.kind == NodeKind::Eventually);
        break;
      }
      case NodeKind::Until: {
        auto w = stepWindow(n.interval, Ts);
        auto e1 = extend(val[n.children[0]], w.hi);
        auto e2 = extend(val[n.children[1]], w.hi);
        const int E = static_cast<int>(e1.size());
        if (boolean) {
          std::vector<int> nextFalse(E + 1, E);
          for (int j = E - 1; j >= 0; --j) nextFalse[j] = e1[j] > 0 ? nextFalse[j + 1] : j;
          std::vector<int> cnt(E + 1, 0);
          for (int j = 0; j < E; ++j) cnt[j + 1] = cnt[j] + (e2[j] > 0 ? 1 : 0);
          for (int q = 0; q < count; ++q) {
            int from = q + w.lo;
            int to = std::min({q + w.hi, nextFalse[q] - 1, E - 1});
            out[q] = (to >= from && cnt[to + 1] - cnt[from] > 0) ? 1.0 : -1.0;
          }
        } else {
          for (int q = 0; q < count; ++q) {
            double best = kBottom, run1 = std::numeric_limits<double>::infinity();
            int end = std::min(q + w.hi, E - 1);
            for (int j = q; j <= end; ++j) {
              run1 = std::min(run1, e1[j]);
              if (j >= q + w.lo) best = std::max(best, std::min(run1, e2[j]));
              if (run1 <= best) break;
            }
            out[q] = best;
          }
        }
        break;
      }
    }
  }
  return val;
}

namespace {

double evalRun(const Formula& f, const Run& run, size_t k) {
  if (run.size() == 0) throw std::invalid_argument("empty run");
  if (k >= run.size()) throw std::invalid_argument("evaluation index past the end of the run");
  FlatFormula flat(f);
  std::vector<Eigen::VectorXd> pts(run.size());
  for (size_t i = 0; i < run.size(); ++i) pts[i] = run.point(i);
  if (flat.dimension() >= 0 && flat.dimension() != pts[0].size())
    throw std::invalid_argument("formula dimension does not match the run");
  Lasso lasso{static_cast<int>(run.size()) - 1, std::nullopt};
  auto val = evaluateNodes(flat, run.Ts, lasso, [&](int id, int q) {
    return flat.nodes[id].literal.value(pts[q]);
  });
  return val[0][k];
}

}  // namespace

double robustness(const Formula& f, const Run& run, size_t k) {
  size_t need = k + static_cast<size_t>(horizonSteps(f, run.Ts)) + 1;
  if (run.size() < need)
    throw std::invalid_argument("run has " + std::to_string(run.size()) + " samples but " +
                                std::to_string(need) + " are needed for the formula horizon");
  return evalRun(f, run, k);
}

double robustnessFinite(const Formula& f, const Run& run, size_t k) { return evalRun(f, run, k); }

bool coarse_satisfies(const Formula& f, const CoarseRun& cr) {
  cr.validate();
  FlatFormula flat(f);
  Lasso lasso{cr.K(), cr.hasLoop() ? std::optional<int>(cr.loopIndex) : std::nullopt};
  auto val = evaluateNodes(
      flat, cr.Ts, lasso,
      [&](int id, int q) {
        const auto& h = flat.nodes[id].literal;
        return h.value(cr.points[q]) > 0 && h.value(cr.points[q + 1]) > 0 ? 1.0 : -1.0;
      },
      true);
  return val[0][0] > 0;
}

Run unroll(const CoarseRun& cr, int Kprime) {
  cr.validate();
  if (Kprime < cr.K()) throw std::invalid_argument("unroll length shorter than the coarse run");
  if (!cr.hasLoop() && Kprime != cr.K())
    throw std::invalid_argument("cannot unroll past K without a loop");
  Lasso lasso{cr.K(), cr.hasLoop() ? std::optional<int>(cr.loopIndex) : std::nullopt};
  Run out;
  out.Ts = cr.Ts;
  int n = cr.stateDim;
  for (int j = 0; j <= Kprime; ++j) {
    const auto& p = cr.points[*lasso.fold(j)];
    out.states.push_back(p.head(n));
    out.inputs.push_back(p.tail(p.size() - n));
  }
  return out;
}

Run unrollLasso(const Run& run, std::optional<int> loopStart, int Kprime) {
  if (run.size() == 0) throw std::invalid_argument("empty run");
  const int last = static_cast<int>(run.size()) - 1;
  if (loopStart && (*loopStart < 1 || *loopStart > last)) throw std::invalid_argument("loop start out of range");
  if (!loopStart && Kprime > last) throw std::invalid_argument("cannot unroll past the end without a loop");
  Lasso lasso{last, loopStart};
  Run out;
  out.Ts = run.Ts;
  for (int j = 0; j <= Kprime; ++j) {
    int q = *lasso.fold(j);
    out.states.push_back(run.states[q]);
    if (q < static_cast<int>(run.inputs.size())) out.inputs.push_back(run.inputs[q]);
  }
  return out;
}

}  // namespace stlsynth
