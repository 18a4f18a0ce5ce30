#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "safesim/model.hpp"
#include "safesim/qp.hpp"

namespace safesim::barrier {

struct BarrierParams {
  double ds = 0.08;              // m, minimum safety distance
  double gamma = 1.0;            // 1/s
  double alpha_bound = 0.1;      // m/s, per-coordinate speed bound
  double neighbor_radius = 0.20; // m; +inf selects all pairs
  double boundary_margin = 0.04; // m, default ds/2

  bool valid() const {
    return ds > 0.0 && gamma > 0.0 && alpha_bound > 0.0 &&
           neighbor_radius >= ds && boundary_margin >= 0.0;
  }
};

struct Workspace {
  double xmin = -0.65;
  double xmax = 0.65;
  double ymin = -0.45;
  double ymax = 0.45;

  bool valid(double ds) const {
    return xmax - xmin > 2.0 * ds && ymax - ymin > 2.0 * ds;
  }
  bool contains(double x, double y) const {
    return x >= xmin && x <= xmax && y >= ymin && y <= ymax;
  }
};

enum class RowKind { pairwise, boundary };

// Boundary faces, in row-emission order.
enum class Face { left = 0, right = 1, bottom = 2, top = 3 };

struct ConstraintRow {
  qp::LinearRow row;
  RowKind kind = RowKind::pairwise;
  int i = 0;
  int j = 0;  // pair partner, or the Face index for boundary rows
};

struct ConstraintSet {
  std::vector<ConstraintRow> rows;
  int n = 0;  // robots, dim = 2n
};

/// Starting configuration outside the safe set; invariance cannot be certified.
class UnsafeStartError : public std::runtime_error {
 public:
  UnsafeStartError(std::string msg, std::vector<std::pair<int, int>> pairs,
                   std::vector<int> outside)
      : std::runtime_error(std::move(msg)),
        violating_pairs(std::move(pairs)),
        outside_robots(std::move(outside)) {}

  std::vector<std::pair<int, int>> violating_pairs;
  std::vector<int> outside_robots;
};

/// h_ij = ||xi - xj||^2 - ds^2.
double h_pairwise(const Eigen::Vector2d& xi, const Eigen::Vector2d& xj, double ds);

/// One row per unordered in-radius pair plus four boundary rows per robot.
/// Throws UnsafeStartError when a robot is outside the workspace or a pair
/// is closer than ds - start_slack (the slack lets a closed loop tolerate
/// sub-millimeter Euler dips below ds).
ConstraintSet build_constraints(const SwarmState& state, const BarrierParams& params,
                                const Workspace& ws, double start_slack = 0.0);

struct FilterResult {
  Eigen::VectorXd u;        // stacked (2N) filtered command
  bool feasible = true;     // false => emergency stop (u is all-zero)
  std::string diagnostic;
};

FilterResult filter_centralized(const SwarmState& state,
                                const Eigen::VectorXd& desired,
                                const BarrierParams& params, const Workspace& ws,
                                double start_slack = 0.0);

/// N independent 2-variable QPs; each agent takes half the responsibility for
/// every shared pairwise constraint, so the centralized rows stay satisfied.
FilterResult filter_decentralized(const SwarmState& state,
                                  const Eigen::VectorXd& desired,
                                  const BarrierParams& params, const Workspace& ws,
                                  double start_slack = 0.0);

enum class CertificateMode { centralized, decentralized };

inline const char* to_string(CertificateMode m) {
  return m == CertificateMode::centralized ? "centralized" : "decentralized";
}

struct BenchmarkRow {
  int n = 0;
  CertificateMode mode = CertificateMode::centralized;
  double ms_mean = 0.0;
  double ms_min = 0.0;
  double ms_max = 0.0;
  double ms_p95 = 0.0;
};

/// Times one certificate computation (constraint construction + QP) per
/// iteration over random dense states at constant robot density.
/// Decentralized times are reported per agent (total divided by N).
std::vector<BenchmarkRow> benchmark_certificates(const std::vector<int>& n_list,
                                                 const std::vector<CertificateMode>& modes,
                                                 int iters, std::uint64_t seed);

/// Random swarm at the benchmark's density regime (jittered grid, min
/// separation above ds). Exposed for tests.
SwarmState random_dense_state(int n, const BarrierParams& params, Workspace& ws_out,
                              std::uint64_t seed);

}  // namespace safesim::barrier
