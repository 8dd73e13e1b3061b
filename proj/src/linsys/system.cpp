#include "stlsynth/linsys/system.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <memory>
#include <random>
#include <stdexcept>

namespace stlsynth {

std::vector<std::string> LinearSystem::variableNames() const {
  auto v = stateNames;
  v.insert(v.end(), inputNames.begin(), inputNames.end());
  return v;
}

void LinearSystem::validate() const {
  if (A.rows() == 0 || A.rows() != A.cols()) throw std::invalid_argument("A must be square and non-empty");
  if (B.rows() != A.rows()) throw std::invalid_argument("B must have as many rows as A");
  if (!(Ts > 0)) throw std::invalid_argument("sampling period must be positive");
  if (static_cast<int>(stateNames.size()) != n() || static_cast<int>(inputNames.size()) != m())
    throw std::invalid_argument("state/input name lists do not match the dimensions of A and B");
  if (!A.allFinite() || !B.allFinite()) throw std::invalid_argument("non-finite system matrix");
}

Disturbance uniformBoxDisturbance(unsigned long long seed, double bound, int n) {
  auto gen = std::make_shared<std::mt19937_64>(seed);
  return [gen, bound, n](size_t) {
    std::uniform_real_distribution<double> d(-bound, bound);
    Eigen::VectorXd w(n);
    for (int i = 0; i < n; ++i) w[i] = d(*gen);
    return w;
  };
}

Run simulate(const LinearSystem& sys, const Eigen::VectorXd& x0,
             const std::vector<Eigen::VectorXd>& inputs, const Disturbance& disturbance) {
  if (x0.size() != sys.n()) throw std::invalid_argument("initial state dimension mismatch");
  Run run;
  run.Ts = sys.Ts;
  run.states.push_back(x0);
  for (size_t k = 0; k < inputs.size(); ++k) {
    if (inputs[k].size() != sys.m()) throw std::invalid_argument("input dimension mismatch");
    Eigen::VectorXd next = sys.A * run.states.back() + sys.B * inputs[k];
    if (disturbance) {
      Eigen::VectorXd w = disturbance(k);
      if (w.size() != sys.n()) throw std::invalid_argument("disturbance dimension mismatch");
      next += w;
    }
    run.states.push_back(std::move(next));
    run.inputs.push_back(inputs[k]);
  }
  return run;
}

namespace {

void requireSymmetric(const Eigen::MatrixXd& M, int dim, const char* name, bool definite) {
  if (M.rows() != dim || M.cols() != dim)
    throw std::invalid_argument(std::string(name) + " has the wrong dimension");
  double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
    throw std::invalid_argument(std::string(name) + " is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  double minEig = es.eigenvalues().minCoeff();
  if (definite ? !(minEig > 0) : minEig < -1e-9 * scale)
    throw std::invalid_argument(std::string(name) + (definite ? " is not positive definite"
                                                              : " is not positive semidefinite"));
}

}  // namespace

GainSchedule lqr_gains(const LinearSystem& sys, const Eigen::MatrixXd& Qf, const Eigen::MatrixXd& Q,
                       const Eigen::MatrixXd& R, int K) {
  if (K < 0) throw std::invalid_argument("negative horizon");
  requireSymmetric(Qf, sys.n(), "Qf", true);
  requireSymmetric(Q, sys.n(), "Q", false);
  requireSymmetric(R, sys.m(), "R", true);
  const auto& A = sys.A;
  const auto& B = sys.B;
  GainSchedule gs;
  gs.gains.resize(K);
  gs.costs.resize(K + 1);
  gs.costs[K] = Qf;
  for (int k = K - 1; k >= 0; --k) {
    const Eigen::MatrixXd& P = gs.costs[k + 1];
    Eigen::MatrixXd S = R + B.transpose() * P * B;
    Eigen::MatrixXd F = S.ldlt().solve(B.transpose() * P * A);
    Eigen::MatrixXd Pk = A.transpose() * P * A - A.transpose() * P * B * F + Q;
    gs.costs[k] = 0.5 * (Pk + Pk.transpose());
    gs.gains[k] = std::move(F);
  }
  return gs;
}

Run track(const LinearSystem& sys, const Run& nominal, const GainSchedule& gains,
          const Eigen::VectorXd& x0, const Disturbance& disturbance, std::optional<int> loopStart) {
  if (x0.size() != sys.n()) throw std::invalid_argument("initial state dimension mismatch");
  if (nominal.size() == 0) throw std::invalid_argument("empty nominal run");
  const int steps = static_cast<int>(nominal.size()) - 1;
  const int H = gains.horizon();
  if (static_cast<int>(nominal.inputs.size()) < steps)
    throw std::invalid_argument("nominal run lacks inputs");
  if (H < steps && !loopStart) throw std::invalid_argument("gain schedule shorter than the nominal run");
  if (loopStart && (*loopStart < 1 || *loopStart > H))
    throw std::invalid_argument("loop start outside the gain schedule");
  for (auto& F : gains.gains)
    if (F.rows() != sys.m() || F.cols() != sys.n()) throw std::invalid_argument("gain dimension mismatch");

  Run run;
  run.Ts = sys.Ts;
  run.states.push_back(x0);
  for (int k = 0; k < steps; ++k) {
    int g = k;
    if (k >= H) {
      // Point H coincides with point L-1, so step k behaves like step L-1 + (k - L + 1) mod p.
      int base = *loopStart - 1, p = H - *loopStart + 1;
      g = base + (k - base) % p;
    }
    const Eigen::VectorXd& x = run.states.back();
    Eigen::VectorXd u = nominal.inputs[k] - gains.gains[g] * (x - nominal.states[k]);
    Eigen::VectorXd next = sys.A * x + sys.B * u;
    if (disturbance) next += disturbance(k);
    run.inputs.push_back(std::move(u));
    run.states.push_back(std::move(next));
  }
  return run;
}

}  // namespace stlsynth
