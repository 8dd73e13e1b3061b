#pragma once

#include <Eigen/Dense>

#include <string>
#include <utility>
#include <vector>

namespace stlsynth {

/// min c'x subject to sparse rows  a'x <= b  and  a'x = b, x free.
class LinearProgram {
 public:
  using Terms = std::vector<std::pair<int, double>>;
  struct Row {
    Terms terms;
    double rhs;
  };

  int addVariable(double cost = 0.0);
  int addVariables(int count, double cost = 0.0);
  void setCost(int var, double cost) { cost_[var] = cost; }
  void addLessEqual(Terms terms, double rhs);
  void addGreaterEqual(Terms terms, double rhs);
  void addEqual(Terms terms, double rhs);

  int numVariables() const { return static_cast<int>(cost_.size()); }
  const std::vector<double>& cost() const { return cost_; }
  const std::vector<Row>& inequalities() const { return le_; }
  const std::vector<Row>& equalities() const { return eq_; }

 private:
  std::vector<double> cost_;
  std::vector<Row> le_;
  std::vector<Row> eq_;
};

enum class LpStatus { Optimal, Infeasible, Unbounded, Failed };
enum class LpMethod { Auto, Simplex, InteriorPoint };

struct LpResult {
  LpStatus status = LpStatus::Failed;
  Eigen::VectorXd x;
  double objective = 0.0;
  int iterations = 0;
};

std::string toString(LpStatus s);

/// Two-phase dense tableau simplex; returns a basic (vertex) optimum.
LpResult solveSimplex(const LinearProgram& lp);
/// Mehrotra predictor-corrector on the regularized sparse KKT system.
LpResult solveInteriorPoint(const LinearProgram& lp);
/// Simplex for small problems, interior point otherwise or when the simplex gives up.
LpResult solveLp(const LinearProgram& lp, LpMethod method = LpMethod::Auto);

}  // namespace stlsynth
