#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace safesim::qp {

inline constexpr double kFeasTol = 1e-8;

enum class SolveStatus { optimal, infeasible, iteration_limit };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::iteration_limit: return "iteration-limit";
  }
  return "?";
}

/// Sparse half-space row: sum_k coef[k] * u[idx[k]] <= b.
struct LinearRow {
  std::vector<int> idx;
  std::vector<double> coef;
  double b = 0.0;

  static LinearRow dense(const Eigen::VectorXd& a, double b);
  Eigen::VectorXd to_dense(int dim) const;
  double dot(const Eigen::VectorXd& u) const;
  double norm_sq() const;
};

/// min ||u - desired||^2  s.t.  rows,  ||u_i||_inf <= box (per coordinate).
struct QpProblem {
  int dim = 0;
  Eigen::VectorXd desired;
  std::vector<LinearRow> rows;
  double box = 0.0;
};

struct QpSolution {
  Eigen::VectorXd u_star;
  SolveStatus status = SolveStatus::optimal;
  std::vector<int> active_rows;  // indices into QpProblem::rows
  int iterations = 0;
};

/// Dual coordinate ascent (Hildreth) with an equality-KKT polish pass.
/// Deterministic sweep order; identical input gives bit-identical output.
QpSolution solve(const QpProblem& problem);

/// Brute-force active-set enumeration. Exact up to linear-solve round-off.
/// Refuses (throws std::invalid_argument) when dim > 8 or the total row count
/// including box faces exceeds 20.
QpSolution solve_oracle(const QpProblem& problem);

}  // namespace safesim::qp
