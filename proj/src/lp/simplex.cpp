#include "stlsynth/lp/lp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace stlsynth {

int LinearProgram::addVariable(double cost) {
  cost_.push_back(cost);
  return static_cast<int>(cost_.size()) - 1;
}

int LinearProgram::addVariables(int count, double cost) {
  int first = numVariables();
  cost_.insert(cost_.end(), count, cost);
  return first;
}

void LinearProgram::addLessEqual(Terms terms, double rhs) { le_.push_back({std::move(terms), rhs}); }

void LinearProgram::addGreaterEqual(Terms terms, double rhs) {
  for (auto& t : terms) t.second = -t.second;
  le_.push_back({std::move(terms), -rhs});
}

void LinearProgram::addEqual(Terms terms, double rhs) { eq_.push_back({std::move(terms), rhs}); }

std::string toString(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    case LpStatus::Failed: return "failed";
  }
  return "?";
}

namespace {

using Tableau = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class Simplex {
 public:
  explicit Simplex(const LinearProgram& lp) : lp_(lp) {
    n_ = lp.numVariables();
    const auto& le = lp.inequalities();
    const auto& eq = lp.equalities();
    m_ = static_cast<int>(le.size() + eq.size());
    slack0_ = 2 * n_;
    const int nSlack = static_cast<int>(le.size());
    art0_ = slack0_ + nSlack;

    // Count artificials: equality rows and inequality rows with negative rhs.
    int nArt = static_cast<int>(eq.size());
    for (auto& r : le) nArt += r.rhs < 0;
    cols_ = art0_ + nArt;
    T_ = Tableau::Zero(m_ + 1, cols_ + 1);
    basis_.assign(m_, -1);

    int art = art0_;
    auto fill = [&](int row, const LinearProgram::Row& r, double sign) {
      for (auto& [j, a] : r.terms) {
        T_(row, j) += sign * a;
        T_(row, n_ + j) -= sign * a;
      }
      T_(row, cols_) = sign * r.rhs;
    };
    for (int i = 0; i < nSlack; ++i) {
      double sign = le[i].rhs < 0 ? -1.0 : 1.0;
      fill(i, le[i], sign);
      T_(i, slack0_ + i) = sign;
      if (sign > 0) {
        basis_[i] = slack0_ + i;
      } else {
        T_(i, art) = 1.0;
        basis_[i] = art++;
      }
    }
    for (size_t e = 0; e < eq.size(); ++e) {
      int row = nSlack + static_cast<int>(e);
      double sign = eq[e].rhs < 0 ? -1.0 : 1.0;
      fill(row, eq[e], sign);
      T_(row, art) = 1.0;
      basis_[row] = art++;
    }
    scale_ = std::max(1.0, T_.cwiseAbs().maxCoeff());
  }

  LpResult solve() {
    LpResult res;
    const double tol = 1e-9;
    // Phase I: minimize the sum of artificials.
    if (cols_ > art0_) {
      T_.row(m_).setZero();
      for (int j = art0_; j < cols_; ++j) T_(m_, j) = 1.0;
      for (int i = 0; i < m_; ++i)
        if (basis_[i] >= art0_) T_.row(m_) -= T_.row(i);
      auto st = iterate(cols_, res.iterations);
      if (st != LpStatus::Optimal) {
        res.status = st == LpStatus::Unbounded ? LpStatus::Failed : st;
        return res;
      }
      if (-T_(m_, cols_) > 1e-7 * scale_) {
        res.status = LpStatus::Infeasible;
        return res;
      }
      // Drive remaining artificials out of the basis where possible.
      for (int i = 0; i < m_; ++i) {
        if (basis_[i] < art0_) continue;
        int best = -1;
        double bestAbs = tol;
        for (int j = 0; j < art0_; ++j)
          if (std::abs(T_(i, j)) > bestAbs) {
            bestAbs = std::abs(T_(i, j));
            best = j;
          }
        if (best >= 0) pivot(i, best);
      }
    }
    // Phase II.
    T_.row(m_).setZero();
    for (int j = 0; j < n_; ++j) {
      T_(m_, j) = lp_.cost()[j];
      T_(m_, n_ + j) = -lp_.cost()[j];
    }
    for (int i = 0; i < m_; ++i) {
      double cb = basisCost(basis_[i]);
      if (cb != 0.0) T_.row(m_) -= cb * T_.row(i);
    }
    auto st = iterate(art0_, res.iterations);
    if (st != LpStatus::Optimal) {
      res.status = st;
      return res;
    }
    Eigen::VectorXd y = Eigen::VectorXd::Zero(cols_);
    for (int i = 0; i < m_; ++i) y[basis_[i]] = std::max(0.0, T_(i, cols_));
    res.x = y.head(n_) - y.segment(n_, n_);
    res.objective = 0.0;
    for (int j = 0; j < n_; ++j) res.objective += lp_.cost()[j] * res.x[j];
    res.status = LpStatus::Optimal;
    return res;
  }

 private:
  double basisCost(int var) const {
    if (var < n_) return lp_.cost()[var];
    if (var < 2 * n_) return -lp_.cost()[var - n_];
    return 0.0;
  }

  void pivot(int row, int col) {
    T_.row(row) /= T_(row, col);
    for (int i = 0; i <= m_; ++i) {
      if (i == row) continue;
      double f = T_(i, col);
      if (f != 0.0) T_.row(i) -= f * T_.row(row);
    }
    basis_[row] = col;
  }

  /// Optimizes the current objective row over columns [0, limit).
  LpStatus iterate(int limit, int& iterations) {
    const double tol = 1e-9;
    int degenerate = 0;
    const int maxIter = 1000 + 5 * (m_ + cols_);
    for (int it = 0; it < maxIter; ++it) {
      bool bland = degenerate > 50;
      int enter = -1;
      double best = -tol;
      for (int j = 0; j < limit; ++j) {
        double d = T_(m_, j);
        if (d < best) {
          enter = j;
          best = d;
          if (bland) break;
        }
      }
      if (enter < 0) return LpStatus::Optimal;
      int leave = -1;
      double ratio = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m_; ++i) {
        double a = T_(i, enter);
        if (a <= tol) continue;
        double r = std::max(0.0, T_(i, cols_)) / a;
        if (r < ratio - 1e-12 ||
            (r <= ratio + 1e-12 && leave >= 0 &&
             (bland ? basis_[i] < basis_[leave] : a > T_(leave, enter)))) {
          ratio = r;
          leave = i;
        }
      }
      if (leave < 0) return LpStatus::Unbounded;
      degenerate = ratio <= 1e-12 ? degenerate + 1 : 0;
      pivot(leave, enter);
      ++iterations;
    }
    return LpStatus::Failed;
  }

  const LinearProgram& lp_;
  int n_ = 0, m_ = 0, cols_ = 0, slack0_ = 0, art0_ = 0;
  double scale_ = 1.0;
  Tableau T_;
  std::vector<int> basis_;
};

}  // namespace

LpResult solveSimplex(const LinearProgram& lp) { return Simplex(lp).solve(); }

LpResult solveLp(const LinearProgram& lp, LpMethod method) {
  if (method == LpMethod::Simplex) return solveSimplex(lp);
  if (method == LpMethod::InteriorPoint) return solveInteriorPoint(lp);
  const double rows = static_cast<double>(lp.inequalities().size() + lp.equalities().size());
  const double cols = 2.0 * lp.numVariables() + rows;
  if (rows * cols <= 2e5) {
    auto r = solveSimplex(lp);
    if (r.status != LpStatus::Failed) return r;
  }
  return solveInteriorPoint(lp);
}

}  // namespace stlsynth
