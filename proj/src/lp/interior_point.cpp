#include "stlsynth/lp/lp.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <limits>

namespace stlsynth {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

/// Rows scaled to unit max-norm; scaling rows leaves the primal solution unchanged.
void buildScaled(const std::vector<LinearProgram::Row>& rows, int n, SpMat& M, Vec& rhs) {
  std::vector<Eigen::Triplet<double>> trip;
  rhs.resize(static_cast<int>(rows.size()));
  for (int i = 0; i < static_cast<int>(rows.size()); ++i) {
    double s = 0.0;
    for (auto& [j, a] : rows[i].terms) s = std::max(s, std::abs(a));
    if (s == 0.0) s = 1.0;
    for (auto& [j, a] : rows[i].terms) trip.emplace_back(i, j, a / s);
    rhs[i] = rows[i].rhs / s;
  }
  M.resize(static_cast<int>(rows.size()), n);
  M.setFromTriplets(trip.begin(), trip.end());
}

/// Largest alpha keeping v + alpha dv >= 0 (may exceed 1).
double maxStep(const Vec& v, const Vec& dv) {
  double a = 1e300;
  for (int i = 0; i < v.size(); ++i)
    if (dv[i] < 0) a = std::min(a, -v[i] / dv[i]);
  return a;
}

}  // namespace

LpResult solveInteriorPoint(const LinearProgram& lp) {
  const int n = lp.numVariables();
  SpMat G, A;
  Vec h, b;
  buildScaled(lp.inequalities(), n, G, h);
  buildScaled(lp.equalities(), n, A, b);
  const int m = static_cast<int>(G.rows());
  const int p = static_cast<int>(A.rows());
  Vec c = Eigen::Map<const Vec>(lp.cost().data(), n);
  SpMat Gt = G.transpose(), At = A.transpose();
  bool analyzed = false;

  double regP = 1e-10, regD = 1e-10;
  Eigen::SimplicialLDLT<SpMat, Eigen::Lower> ldlt;
  SpMat K;  // lower triangle of the regularized augmented matrix

  // Augmented system over (dx, dy, dz):
  //   [ regP I   A'       G'         ]
  //   [ A        -regD I  0          ]
  //   [ G        0        -D - regD I ]   with D = s / z.
  // It is quasi-definite, so LDLT exists for any symmetric ordering.
  auto factorOnce = [&](const Vec& d) {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(n + p + m + A.nonZeros() + G.nonZeros());
    for (int i = 0; i < n; ++i) trip.emplace_back(i, i, regP);
    for (int k = 0; k < A.outerSize(); ++k)
      for (SpMat::InnerIterator it(A, k); it; ++it) trip.emplace_back(n + it.row(), it.col(), it.value());
    for (int i = 0; i < p; ++i) trip.emplace_back(n + i, n + i, -regD);
    for (int k = 0; k < G.outerSize(); ++k)
      for (SpMat::InnerIterator it(G, k); it; ++it) trip.emplace_back(n + p + it.row(), it.col(), it.value());
    for (int i = 0; i < m; ++i) trip.emplace_back(n + p + i, n + p + i, -d[i] - regD);
    K.resize(n + p + m, n + p + m);
    K.setFromTriplets(trip.begin(), trip.end());
    if (!analyzed) {
      ldlt.analyzePattern(K);
      analyzed = true;
    }
    ldlt.factorize(K);
    return ldlt.info() == Eigen::Success;
  };
  auto factor = [&](const Vec& d) {
    for (regP = 1e-10, regD = 1e-10; regP <= 1e-4; regP *= 100, regD *= 100)
      if (factorOnce(d)) return true;
    return false;
  };
  auto solve = [&](const Vec& r1, const Vec& r2, const Vec& r3, Vec& x, Vec& y, Vec& zz) {
    Vec rhs(n + p + m);
    rhs << r1, r2, r3;
    Vec sol = ldlt.solve(rhs);
    // Refine against the unregularized matrix so the regularization does not bias the step.
    double prev = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 10; ++it) {
      Vec r = rhs - K.selfadjointView<Eigen::Lower>() * sol;
      r.head(n) += regP * sol.head(n);
      r.tail(p + m) -= regD * sol.tail(p + m);
      double norm = r.cwiseAbs().maxCoeff();
      if (!(norm < 0.5 * prev) || norm <= 1e-14 * (1.0 + rhs.cwiseAbs().maxCoeff())) break;
      prev = norm;
      sol += ldlt.solve(r);
    }
    x = sol.head(n);
    y = sol.segment(n, p);
    zz = sol.tail(m);
  };

  LpResult res;
  Vec x(n), y(p), s(m), z(m);
  // Least-squares primal (min |s|) and dual (min |z|) starts, then shifted inside.
  if (!factor(Vec::Ones(m))) return res;
  {
    Vec zz;
    solve(Vec::Zero(n), b, h, x, y, zz);
    s = h - G * x;
    Vec xd;
    solve(-c, Vec::Zero(p), Vec::Zero(m), xd, y, z);
  }
  for (int i = 0; i < m; ++i) {
    s[i] = std::max(s[i], 1.0);
    z[i] = std::max(z[i], 1.0);
  }

  // Primal feasibility is what callers rely on; dual residual and gap only
  // certify the objective, which callers compare against tolerances >= 1e-7.
  const double tol = 1e-9, tolDual = 1e-7, tolGap = 1e-8;
  const double bn = 1.0 + (p ? b.cwiseAbs().maxCoeff() : 0.0);
  const double hn = 1.0 + (m ? h.cwiseAbs().maxCoeff() : 0.0);
  const double cn = 1.0 + (n ? c.cwiseAbs().maxCoeff() : 0.0);
  for (int iter = 0; iter < 200; ++iter) {
    res.iterations = iter;
    Vec rd = c + Gt * z + At * y;
    Vec rp = A * x - b;
    Vec rg = G * x + s - h;
    double mu = m ? s.dot(z) / m : 0.0;
    double pobj = c.dot(x);
    bool primalOk = (p == 0 || rp.cwiseAbs().maxCoeff() <= tol * bn) &&
                    (m == 0 || rg.cwiseAbs().maxCoeff() <= tol * hn);
    bool dualOk = rd.cwiseAbs().maxCoeff() <= tolDual * cn;
    // Complementarity gap; pobj - dobj also carries the residual terms, which
    // the two checks above already bound.
    bool gapOk = (m == 0 || s.dot(z) <= tolGap * (1.0 + std::abs(pobj)));
    if (primalOk && dualOk && gapOk) {
      res.status = LpStatus::Optimal;
      res.x = x;
      res.objective = pobj;
      return res;
    }
    if (!x.allFinite() || x.cwiseAbs().maxCoeff() > 1e13 || (m && z.maxCoeff() > 1e13)) break;

    if (!factor(s.cwiseQuotient(z))) break;
    auto direction = [&](const Vec& rc, Vec& dx, Vec& dy, Vec& ds, Vec& dz) {
      solve(-rd, -rp, -rg - rc.cwiseQuotient(z), dx, dy, dz);
      ds = (rc - s.cwiseProduct(dz)).cwiseQuotient(z);
    };
    Vec dx, dy, ds, dz;
    direction(-s.cwiseProduct(z), dx, dy, ds, dz);
    double ap = std::min(1.0, maxStep(s, ds)), ad = std::min(1.0, maxStep(z, dz));
    double sigma = 0.0;
    if (m) {
      double muAff = (s + ap * ds).dot(z + ad * dz) / m;
      sigma = std::pow(std::max(0.0, muAff / mu), 3);
    }
    Vec rc = Vec::Constant(m, sigma * mu) - s.cwiseProduct(z) - ds.cwiseProduct(dz);
    direction(rc, dx, dy, ds, dz);
    ap = std::min(1.0, 0.99 * maxStep(s, ds));
    ad = std::min(1.0, 0.99 * maxStep(z, dz));
    x += ap * dx;
    s += ap * ds;
    y += ad * dy;
    z += ad * dz;
  }
  res.status = LpStatus::Failed;
  return res;
}

}  // namespace stlsynth
