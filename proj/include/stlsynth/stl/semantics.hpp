#pragma once

#include "stlsynth/run.hpp"
#include "stlsynth/stl/formula.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace stlsynth {

/// Coarse run r~_0..r~_{K+1} in (K,L)-loop form. There is a loop when L <= K.
struct CoarseRun {
  std::vector<Eigen::VectorXd> points;  ///< stacked (x, u), K+2 of them
  int loopIndex = 1;
  double Ts = 1.0;
  int stateDim = 0;

  int K() const { return static_cast<int>(points.size()) - 2; }
  bool hasLoop() const { return loopIndex <= K(); }
  void validate() const;
};

/// Positions 0..last of a finite sequence, optionally closed into a lasso
/// whose index last+1 wraps to loopStart.
struct Lasso {
  int last = 0;
  std::optional<int> loopStart;

  std::optional<int> fold(long j) const;
  int period() const { return loopStart ? last - *loopStart + 1 : 0; }
};

/// Values of every node of `flat` at every lasso position. Atoms come from
/// `atom(nodeId, position)`; indices past the end of a loop-free lasso take
/// the value -inf. With `boolean` set, atom values must be +1 or -1 and the
/// result is the Boolean semantics in the same encoding.
std::vector<std::vector<double>> evaluateNodes(const FlatFormula& flat, double Ts, const Lasso& lasso,
                                               const std::function<double(int, int)>& atom,
                                               bool boolean = false);

/// Quantitative semantics at step k. Throws if the run is shorter than the
/// formula horizon requires.
double robustness(const Formula& f, const Run& run, size_t k = 0);

/// Like robustness() but samples past the end of the run count as -inf.
double robustnessFinite(const Formula& f, const Run& run, size_t k = 0);

/// r~ |=_0^(K,L) f with predicates required at both endpoints of each step.
bool coarse_satisfies(const Formula& f, const CoarseRun& cr);

/// r~_0 .. r~_{L-1} followed by repetitions of r~_L .. r~_K, cut to K'+1 points.
Run unroll(const CoarseRun& cr, int Kprime);

/// A run r_0..r_K whose successor of r_K is r_{loopStart}, cut to K'+1 points.
Run unrollLasso(const Run& run, std::optional<int> loopStart, int Kprime);

}  // namespace stlsynth
