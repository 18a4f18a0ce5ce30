#include "safesim/barrier.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "safesim/rng.hpp"

namespace safesim::barrier {

double h_pairwise(const Eigen::Vector2d& xi, const Eigen::Vector2d& xj, double ds) {
  return (xi - xj).squaredNorm() - ds * ds;
}

namespace {

Eigen::Vector2d position(const SwarmState& state, int i) {
  return {state.poses[i].x1, state.poses[i].x2};
}

void check_safe_start(const SwarmState& state, const BarrierParams& params,
                      const Workspace& ws, double start_slack) {
  const int n = static_cast<int>(state.size());
  std::vector<int> outside;
  std::vector<std::pair<int, int>> close;
  for (int i = 0; i < n; ++i) {
    if (!ws.contains(state.poses[i].x1, state.poses[i].x2)) outside.push_back(i);
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if ((position(state, i) - position(state, j)).norm() < params.ds - start_slack) {
        close.emplace_back(i, j);
      }
    }
  }
  if (!outside.empty() || !close.empty()) {
    std::ostringstream msg;
    msg << "unsafe start:";
    for (int i : outside) msg << " robot " << i << " outside workspace;";
    for (auto [i, j] : close) msg << " pair (" << i << "," << j << ") closer than ds;";
    throw UnsafeStartError(msg.str(), std::move(close), std::move(outside));
  }
}

// Four boundary half-space CBF rows for robot i in a 2-dim block layout.
// `block` maps the robot's block start index (0 for per-agent QPs).
void append_boundary_rows(std::vector<ConstraintRow>& out, int i, int block,
                          double x, double y, const BarrierParams& p,
                          const Workspace& ws) {
  const double g = p.gamma;
  const double m = p.boundary_margin;
  out.push_back({{{block}, {-1.0}, g * (x - ws.xmin - m)},
                 RowKind::boundary, i, static_cast<int>(Face::left)});
  out.push_back({{{block}, {1.0}, g * (ws.xmax - m - x)},
                 RowKind::boundary, i, static_cast<int>(Face::right)});
  out.push_back({{{block + 1}, {-1.0}, g * (y - ws.ymin - m)},
                 RowKind::boundary, i, static_cast<int>(Face::bottom)});
  out.push_back({{{block + 1}, {1.0}, g * (ws.ymax - m - y)},
                 RowKind::boundary, i, static_cast<int>(Face::top)});
}

}  // namespace

ConstraintSet build_constraints(const SwarmState& state, const BarrierParams& params,
                                const Workspace& ws, double start_slack) {
  check_safe_start(state, params, ws, start_slack);
  const int n = static_cast<int>(state.size());
  ConstraintSet set;
  set.n = n;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const Eigen::Vector2d d = position(state, i) - position(state, j);
      if (d.norm() > params.neighbor_radius) continue;
      ConstraintRow row;
      row.kind = RowKind::pairwise;
      row.i = i;
      row.j = j;
      row.row.idx = {2 * i, 2 * i + 1, 2 * j, 2 * j + 1};
      row.row.coef = {-2.0 * d.x(), -2.0 * d.y(), 2.0 * d.x(), 2.0 * d.y()};
      row.row.b = params.gamma * h_pairwise(position(state, i), position(state, j),
                                            params.ds);
      set.rows.push_back(std::move(row));
    }
  }
  for (int i = 0; i < n; ++i) {
    append_boundary_rows(set.rows, i, 2 * i, state.poses[i].x1, state.poses[i].x2,
                         params, ws);
  }
  return set;
}

FilterResult filter_centralized(const SwarmState& state,
                                const Eigen::VectorXd& desired,
                                const BarrierParams& params, const Workspace& ws,
                                double start_slack) {
  const ConstraintSet set = build_constraints(state, params, ws, start_slack);
  qp::QpProblem problem;
  problem.dim = 2 * set.n;
  problem.desired = desired;
  problem.box = params.alpha_bound;
  problem.rows.reserve(set.rows.size());
  for (const auto& r : set.rows) problem.rows.push_back(r.row);

  const qp::QpSolution sol = qp::solve(problem);
  FilterResult result;
  if (sol.status == qp::SolveStatus::optimal) {
    result.u = sol.u_star;
  } else {
    result.u = Eigen::VectorXd::Zero(problem.dim);
    result.feasible = false;
    result.diagnostic = std::string("centralized QP ") + qp::to_string(sol.status) +
                        "; emergency stop";
  }
  return result;
}

FilterResult filter_decentralized(const SwarmState& state,
                                  const Eigen::VectorXd& desired,
                                  const BarrierParams& params, const Workspace& ws,
                                  double start_slack) {
  check_safe_start(state, params, ws, start_slack);
  const int n = static_cast<int>(state.size());
  FilterResult result;
  result.u = Eigen::VectorXd::Zero(2 * n);
  std::ostringstream diag;
  for (int i = 0; i < n; ++i) {
    qp::QpProblem problem;
    problem.dim = 2;
    problem.desired = desired.segment<2>(2 * i);
    problem.box = params.alpha_bound;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const Eigen::Vector2d d = position(state, i) - position(state, j);
      if (d.norm() > params.neighbor_radius) continue;
      // Agent i's half of the shared constraint:
      // -2(xi-xj)^T u_i <= (gamma/2) h_ij.
      qp::LinearRow row;
      row.idx = {0, 1};
      row.coef = {-2.0 * d.x(), -2.0 * d.y()};
      row.b = 0.5 * params.gamma *
              h_pairwise(position(state, i), position(state, j), params.ds);
      problem.rows.push_back(std::move(row));
    }
    std::vector<ConstraintRow> brows;
    append_boundary_rows(brows, i, 0, state.poses[i].x1, state.poses[i].x2, params, ws);
    for (auto& r : brows) problem.rows.push_back(std::move(r.row));

    const qp::QpSolution sol = qp::solve(problem);
    if (sol.status == qp::SolveStatus::optimal) {
      result.u.segment<2>(2 * i) = sol.u_star;
    } else {
      // Zero is always feasible for the agent's own half-constraints (b >= 0
      // from a safe start), so this is a conservative stop, not a failure.
      result.feasible = false;
      diag << "agent " << i << " QP " << qp::to_string(sol.status) << "; ";
    }
  }
  result.diagnostic = diag.str();
  return result;
}

SwarmState random_dense_state(int n, const BarrierParams& params, Workspace& ws_out,
                              std::uint64_t seed) {
  // Jittered grid at a spacing comfortably above ds and below the neighbor
  // radius, matching the testbed's packing regime at any N.
  const double spacing = 0.13;
  const double jitter = 0.2 * (spacing - params.ds);
  const int cells = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
  const double side = cells * spacing;
  ws_out.xmin = -0.5 * side - 0.1;
  ws_out.xmax = 0.5 * side + 0.1;
  ws_out.ymin = -0.5 * side - 0.1;
  ws_out.ymax = 0.5 * side + 0.1;

  SwarmState state;
  state.poses.resize(n);
  for (int i = 0; i < n; ++i) {
    const int gx = i % cells;
    const int gy = i / cells;
    state.poses[i].x1 = -0.5 * side + (gx + 0.5) * spacing +
                        jitter * (2.0 * rng::uniform(seed, i, 0) - 1.0);
    state.poses[i].x2 = -0.5 * side + (gy + 0.5) * spacing +
                        jitter * (2.0 * rng::uniform(seed, i, 1) - 1.0);
    state.poses[i].x3 = wrap_angle(2.0 * M_PI * rng::uniform(seed, i, 2));
  }
  return state;
}

std::vector<BenchmarkRow> benchmark_certificates(const std::vector<int>& n_list,
                                                 const std::vector<CertificateMode>& modes,
                                                 int iters, std::uint64_t seed) {
  if (n_list.empty()) throw std::invalid_argument("benchmark: empty n_list");
  if (iters < 1) throw std::invalid_argument("benchmark: iters must be >= 1");
  BarrierParams params;
  std::vector<BenchmarkRow> table;
  for (int n : n_list) {
    // States and desired commands are generated outside the timed section.
    std::vector<SwarmState> states(iters);
    std::vector<Eigen::VectorXd> desireds(iters);
    Workspace ws;
    for (int it = 0; it < iters; ++it) {
      states[it] = random_dense_state(n, params, ws, rng::derive_seed(seed, it));
      desireds[it].resize(2 * n);
      for (int k = 0; k < 2 * n; ++k) {
        desireds[it][k] = params.alpha_bound *
                          (2.0 * rng::uniform(rng::derive_seed(seed, it), k, 7) - 1.0);
      }
    }
    for (CertificateMode mode : modes) {
      std::vector<double> ms(iters);
      for (int it = 0; it < iters; ++it) {
        const auto t0 = std::chrono::steady_clock::now();
        const FilterResult r =
            mode == CertificateMode::centralized
                ? filter_centralized(states[it], desireds[it], params, ws)
                : filter_decentralized(states[it], desireds[it], params, ws);
        const auto t1 = std::chrono::steady_clock::now();
        (void)r;
        double elapsed = std::chrono::duration<double, std::milli>(t1 - t0).count();
        if (mode == CertificateMode::decentralized) elapsed /= n;
        ms[it] = elapsed;
      }
      BenchmarkRow row;
      row.n = n;
      row.mode = mode;
      row.ms_mean = std::accumulate(ms.begin(), ms.end(), 0.0) / iters;
      row.ms_min = *std::min_element(ms.begin(), ms.end());
      row.ms_max = *std::max_element(ms.begin(), ms.end());
      std::vector<double> sorted = ms;
      std::sort(sorted.begin(), sorted.end());
      row.ms_p95 = sorted[static_cast<std::size_t>(0.95 * (iters - 1))];
      table.push_back(row);
    }
  }
  return table;
}

}  // namespace safesim::barrier
