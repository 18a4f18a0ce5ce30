#include "safesim/qp.hpp"

#include <algorithm>
#include <cmath>
#include <bit>
#include <limits>
#include <stdexcept>

namespace safesim::qp {

LinearRow LinearRow::dense(const Eigen::VectorXd& a, double b) {
  LinearRow row;
  row.b = b;
  for (int k = 0; k < a.size(); ++k) {
    if (a[k] != 0.0) {
      row.idx.push_back(k);
      row.coef.push_back(a[k]);
    }
  }
  return row;
}

Eigen::VectorXd LinearRow::to_dense(int dim) const {
  Eigen::VectorXd a = Eigen::VectorXd::Zero(dim);
  for (std::size_t k = 0; k < idx.size(); ++k) a[idx[k]] = coef[k];
  return a;
}

double LinearRow::dot(const Eigen::VectorXd& u) const {
  double s = 0.0;
  for (std::size_t k = 0; k < idx.size(); ++k) s += coef[k] * u[idx[k]];
  return s;
}

double LinearRow::norm_sq() const {
  double s = 0.0;
  for (double c : coef) s += c * c;
  return s;
}

namespace {

void validate(const QpProblem& p) {
  if (p.dim <= 0 || p.desired.size() != p.dim) {
    throw std::invalid_argument("qp: dim/desired mismatch");
  }
  if (!(p.box > 0.0)) throw std::invalid_argument("qp: box must be positive");
  if (!p.desired.allFinite()) throw std::invalid_argument("qp: non-finite desired");
  for (const auto& r : p.rows) {
    if (!std::isfinite(r.b)) throw std::invalid_argument("qp: non-finite row bound");
    for (std::size_t k = 0; k < r.idx.size(); ++k) {
      if (r.idx[k] < 0 || r.idx[k] >= p.dim || !std::isfinite(r.coef[k])) {
        throw std::invalid_argument("qp: bad row entry");
      }
    }
  }
}

// User rows followed by 2*dim box faces (+u_k <= box, -u_k <= box).
std::vector<LinearRow> expand_rows(const QpProblem& p) {
  std::vector<LinearRow> rows = p.rows;
  rows.reserve(p.rows.size() + 2 * p.dim);
  for (int k = 0; k < p.dim; ++k) rows.push_back({{k}, {1.0}, p.box});
  for (int k = 0; k < p.dim; ++k) rows.push_back({{k}, {-1.0}, p.box});
  return rows;
}

// Scaling each row to unit norm leaves the feasible set unchanged but
// conditions the dual ascent, which otherwise crawls on rows of very
// different magnitudes.
std::vector<LinearRow> normalize_rows(std::vector<LinearRow> rows) {
  for (auto& r : rows) {
    const double norm = std::sqrt(r.norm_sq());
    if (norm == 0.0) continue;
    for (double& c : r.coef) c /= norm;
    r.b /= norm;
  }
  return rows;
}

double max_violation(const std::vector<LinearRow>& rows, const Eigen::VectorXd& u) {
  double v = 0.0;
  for (const auto& r : rows) v = std::max(v, r.dot(u) - r.b);
  return v;
}

// Projection of desired onto {A_act u = b_act}; multipliers returned in nu.
// Rank deficiency handled by the complete orthogonal decomposition.
bool equality_projection(const std::vector<LinearRow>& rows,
                         const std::vector<int>& active, int dim,
                         const Eigen::VectorXd& desired, Eigen::VectorXd& u,
                         Eigen::VectorXd& nu) {
  const int m = static_cast<int>(active.size());
  if (m == 0) {
    u = desired;
    nu.resize(0);
    return true;
  }
  Eigen::MatrixXd a(m, dim);
  Eigen::VectorXd b(m);
  a.setZero();
  for (int r = 0; r < m; ++r) {
    const LinearRow& lr = rows[active[r]];
    for (std::size_t t = 0; t < lr.idx.size(); ++t) a(r, lr.idx[t]) = lr.coef[t];
    b[r] = lr.b;
  }
  Eigen::MatrixXd gram = a * a.transpose();
  const Eigen::VectorXd rhs = a * desired - b;
  // LDLT is cheap and handles the common full-rank case; fall back to the
  // complete orthogonal decomposition only when the residual check fails.
  nu = gram.ldlt().solve(rhs);
  u = desired - a.transpose() * nu;
  if ((a * u - b).lpNorm<Eigen::Infinity>() <= 1e-8) return true;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(gram);
  nu = cod.solve(rhs);
  u = desired - a.transpose() * nu;
  // Inconsistent (rank-deficient) systems leave a residual; reject those.
  return (a * u - b).lpNorm<Eigen::Infinity>() <= 1e-8;
}

}  // namespace

QpSolution solve(const QpProblem& problem) {
  validate(problem);
  const std::vector<LinearRow> raw = expand_rows(problem);
  const int m = static_cast<int>(raw.size());
  const int n_user = static_cast<int>(problem.rows.size());

  QpSolution sol;
  // Fast path: a feasible desired command is its own projection.
  if (max_violation(raw, problem.desired) <= 0.0) {
    sol.u_star = problem.desired;
    sol.status = SolveStatus::optimal;
    return sol;
  }

  const std::vector<LinearRow> rows = normalize_rows(raw);
  std::vector<double> norm_sq(m);
  for (int k = 0; k < m; ++k) norm_sq[k] = rows[k].norm_sq();

  Eigen::VectorXd u = problem.desired;
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd lambda_snapshot = lambda;
  const int max_sweeps = 50 * (m + problem.dim);
  double best_viol = std::numeric_limits<double>::infinity();
  int stall = 0;
  bool converged = false;
  bool diverged = false;
  int sweeps = 0;

  // Farkas-style certificate over a stalled window: the dual increment
  // d >= 0 proves infeasibility when d'b is more negative than ||A'd||
  // times the box radius, because then no point of the box satisfies the
  // rows. A stalled-but-feasible problem never produces such an increment.
  const double box_radius = problem.box * std::sqrt(static_cast<double>(problem.dim));
  const auto certifies_infeasible = [&]() {
    Eigen::VectorXd d = (lambda - lambda_snapshot).cwiseMax(0.0);
    const double l1 = d.lpNorm<1>();
    if (l1 <= 0.0) return false;
    Eigen::VectorXd atd = Eigen::VectorXd::Zero(problem.dim);
    double dtb = 0.0;
    for (int k = 0; k < m; ++k) {
      if (d[k] == 0.0) continue;
      const auto& r = rows[k];
      for (std::size_t t = 0; t < r.idx.size(); ++t) {
        atd[r.idx[t]] += d[k] * r.coef[t];
      }
      dtb += d[k] * r.b;
    }
    return dtb < -(atd.norm() * box_radius + 1e-9 * l1);
  };

  for (; sweeps < max_sweeps; ++sweeps) {
    double max_delta = 0.0;
    for (int k = 0; k < m; ++k) {
      if (norm_sq[k] == 0.0) continue;
      const double resid = rows[k].dot(u) - rows[k].b;
      const double delta = std::max(-lambda[k], resid / norm_sq[k]);
      if (delta != 0.0) {
        lambda[k] += delta;
        const auto& r = rows[k];
        for (std::size_t t = 0; t < r.idx.size(); ++t) {
          u[r.idx[t]] -= delta * r.coef[t];
        }
        max_delta = std::max(max_delta, std::abs(delta));
      }
    }
    if (max_delta < 1e-10) {
      converged = true;
      break;
    }
    const double viol = max_violation(rows, u);
    if (viol > kFeasTol) {
      if (viol > best_viol * (1.0 - 1e-12)) {
        if (stall == 0) lambda_snapshot = lambda;
        if (++stall >= 50) {
          if (certifies_infeasible()) {
            diverged = true;
            break;
          }
          stall = 0;
        }
      } else {
        stall = 0;
      }
      best_viol = std::min(best_viol, viol);
    } else {
      stall = 0;
    }
    if (lambda.lpNorm<Eigen::Infinity>() > 1e12) {
      diverged = true;
      break;
    }
  }
  sol.iterations = sweeps;

  // Polish: active-set refinement seeded by the rows tight at the ascent
  // iterate. Dropping negative-multiplier rows and adding violated rows
  // terminates at the exact projection; when it fails (cycling cap hit,
  // inconsistent degenerate set) the ascent iterate stands.
  std::vector<int> active;
  std::vector<char> in_active(m, 0);
  for (int k = 0; k < m; ++k) {
    if (rows[k].dot(u) - rows[k].b >= -1e-7) {
      active.push_back(k);
      in_active[k] = 1;
    }
  }
  Eigen::VectorXd pu, nu;
  bool polished = false;
  for (int it = 0; it < 4 * m + 8 && !polished; ++it) {
    if (!equality_projection(rows, active, problem.dim, problem.desired, pu, nu)) {
      if (active.empty()) break;
      in_active[active.back()] = 0;
      active.pop_back();
      continue;
    }
    int drop = -1;
    double most_negative = -1e-9;
    for (int r = 0; r < nu.size(); ++r) {
      if (nu[r] < most_negative) {
        most_negative = nu[r];
        drop = r;
      }
    }
    if (drop >= 0) {
      in_active[active[drop]] = 0;
      active.erase(active.begin() + drop);
      continue;
    }
    int add = -1;
    double worst_resid = 1e-10;
    for (int k = 0; k < m; ++k) {
      if (in_active[k]) continue;
      const double resid = rows[k].dot(pu) - rows[k].b;
      if (resid > worst_resid) {
        worst_resid = resid;
        add = k;
      }
    }
    if (add < 0) {
      polished = true;
    } else {
      active.push_back(add);
      in_active[add] = 1;
    }
  }
  if (polished && max_violation(rows, pu) <= 1e-9) {
    u = pu;
  } else {
    // Fall back to the dual-flagged support for the reported active set.
    active.clear();
    for (int k = 0; k < m; ++k) {
      if (lambda[k] > 1e-12) active.push_back(k);
    }
  }

  const double viol = max_violation(rows, u);
  if (viol <= kFeasTol) {
    sol.status = SolveStatus::optimal;
  } else if (diverged || converged) {
    sol.status = SolveStatus::infeasible;
  } else {
    sol.status = SolveStatus::iteration_limit;
  }
  sol.u_star = u;
  for (int k : active) {
    if (k < n_user) sol.active_rows.push_back(k);
  }
  return sol;
}

namespace {

// Gosper's hack: next bit pattern with the same popcount.
inline unsigned next_combination(unsigned v) {
  unsigned t = v | (v - 1);
  return (t + 1) | (((~t & (t + 1)) - 1) >> (std::countr_zero(v) + 1));
}

}  // namespace

QpSolution solve_oracle(const QpProblem& problem) {
  validate(problem);
  const std::vector<LinearRow> rows = expand_rows(problem);
  const int m = static_cast<int>(rows.size());
  const int n_user = static_cast<int>(problem.rows.size());
  if (problem.dim > 8 || m > 20) {
    throw std::invalid_argument("solve_oracle: instance exceeds size caps");
  }

  // Projections have a KKT-consistent active set of size <= dim; the first
  // subset whose equality projection is primal feasible with nonnegative
  // multipliers is the optimum (the projection is unique).
  for (int card = 0; card <= problem.dim; ++card) {
    if (card > m) break;
    unsigned mask = (card == 0) ? 0u : ((1u << card) - 1u);
    const unsigned limit = 1u << m;
    while (true) {
      std::vector<int> active;
      for (int k = 0; k < m; ++k) {
        if (mask & (1u << k)) active.push_back(k);
      }
      Eigen::VectorXd u, nu;
      if (equality_projection(rows, active, problem.dim, problem.desired, u, nu) &&
          max_violation(rows, u) <= 1e-9 &&
          (nu.size() == 0 || nu.minCoeff() >= -1e-9)) {
        QpSolution sol;
        sol.u_star = u;
        sol.status = SolveStatus::optimal;
        for (int k : active) {
          if (k < n_user) sol.active_rows.push_back(k);
        }
        return sol;
      }
      if (card == 0) break;
      mask = next_combination(mask);
      if (mask >= limit) break;
    }
  }
  QpSolution sol;
  sol.u_star = Eigen::VectorXd::Zero(problem.dim);
  sol.status = SolveStatus::infeasible;
  return sol;
}

}  // namespace safesim::qp
