#include "safesim/controllers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace safesim::controllers {

ControllerKind kind_from_string(const std::string& s) {
  if (s == "go_to_goal") return ControllerKind::go_to_goal;
  if (s == "waypoint_follow") return ControllerKind::waypoint_follow;
  if (s == "position_swap") return ControllerKind::position_swap;
  if (s == "consensus") return ControllerKind::consensus;
  if (s == "cyclic_formation") return ControllerKind::cyclic_formation;
  throw std::invalid_argument("unknown controller kind: " + s);
}

std::string to_string(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::go_to_goal: return "go_to_goal";
    case ControllerKind::waypoint_follow: return "waypoint_follow";
    case ControllerKind::position_swap: return "position_swap";
    case ControllerKind::consensus: return "consensus";
    case ControllerKind::cyclic_formation: return "cyclic_formation";
  }
  return "?";
}

SiCommand go_to_goal(const Eigen::Vector2d& x, const Eigen::Vector2d& goal,
                     double kp, double alpha_bound) {
  const Eigen::Vector2d u = kp * (goal - x);
  return saturate(SiCommand{u.x(), u.y()}, alpha_bound);
}

UnicycleCommand waypoint_follow(const RobotPose& pose, const Eigen::Vector2d& waypoint,
                                double k1, double k2, double v_max, double w_max) {
  const double dx = waypoint.x() - pose.x1;
  const double dy = waypoint.y() - pose.x2;
  const double e = std::hypot(dx, dy);
  const double bearing = wrap_angle(std::atan2(dy, dx) - pose.x3);
  UnicycleCommand cmd;
  cmd.v = k1 * e * std::cos(bearing);
  cmd.w = k2 * bearing + k1 * std::cos(bearing) * std::sin(bearing);
  return saturate(cmd, v_max, w_max);
}

Eigen::VectorXd consensus(const std::vector<Eigen::Vector2d>& positions,
                          const Eigen::MatrixXd& weights, double alpha_bound) {
  const int n = static_cast<int>(positions.size());
  Eigen::VectorXd u = Eigen::VectorXd::Zero(2 * n);
  for (int i = 0; i < n; ++i) {
    Eigen::Vector2d ui = Eigen::Vector2d::Zero();
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      ui += weights(i, j) * (positions[j] - positions[i]);
    }
    const SiCommand sat = saturate(SiCommand{ui.x(), ui.y()}, alpha_bound);
    u[2 * i] = sat.ux;
    u[2 * i + 1] = sat.uy;
  }
  return u;
}

Eigen::VectorXd cyclic_formation(const std::vector<Eigen::Vector2d>& positions,
                                 double radius, double radial_gain,
                                 double rotation_gain, double alpha_bound) {
  const int n = static_cast<int>(positions.size());
  if (n < 3) throw std::invalid_argument("cyclic_formation: requires N >= 3");
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  for (const auto& p : positions) centroid += p;
  centroid /= n;

  std::vector<double> angle(n), rad(n);
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector2d d = positions[i] - centroid;
    rad[i] = d.norm();
    angle[i] = std::atan2(d.y(), d.x());
  }

  // Angular neighbors: previous/next agent counterclockwise around the centroid.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return angle[a] < angle[b]; });
  std::vector<int> rank(n);
  for (int r = 0; r < n; ++r) rank[order[r]] = r;

  auto gap = [&](double from, double to) {
    double g = to - from;
    while (g <= 0.0) g += 2.0 * M_PI;
    while (g > 2.0 * M_PI) g -= 2.0 * M_PI;
    return g;
  };

  Eigen::VectorXd u = Eigen::VectorXd::Zero(2 * n);
  for (int i = 0; i < n; ++i) {
    const int next = order[(rank[i] + 1) % n];
    const int prev = order[(rank[i] + n - 1) % n];
    const double gap_next = gap(angle[i], angle[next]);
    const double gap_prev = gap(angle[prev], angle[i]);
    const Eigen::Vector2d er(std::cos(angle[i]), std::sin(angle[i]));
    const Eigen::Vector2d et(-er.y(), er.x());
    // Gap equalization is Laplacian smoothing on the circle; it vanishes at
    // uniform spacing, so the regular N-gon at the target radius is equilibrium.
    const Eigen::Vector2d ui = radial_gain * (radius - rad[i]) * er +
                               rotation_gain * 0.5 * (gap_next - gap_prev) *
                                   std::max(rad[i], 1e-6) * et;
    const SiCommand sat = saturate(SiCommand{ui.x(), ui.y()}, alpha_bound);
    u[2 * i] = sat.ux;
    u[2 * i + 1] = sat.uy;
  }
  return u;
}

Eigen::VectorXd position_swap(const std::vector<Eigen::Vector2d>& positions,
                              const std::vector<Eigen::Vector2d>& goals,
                              const std::vector<int>& assignment, double kp,
                              double alpha_bound, double bearing_bias) {
  const int n = static_cast<int>(positions.size());
  if (static_cast<int>(assignment.size()) != n ||
      static_cast<int>(goals.size()) != n) {
    throw std::invalid_argument("position_swap: assignment/goals size mismatch");
  }
  std::vector<bool> seen(n, false);
  for (int a : assignment) {
    if (a < 0 || a >= n || seen[a]) {
      throw std::invalid_argument("position_swap: assignment is not a permutation");
    }
    seen[a] = true;
  }
  const double cb = std::cos(bearing_bias);
  const double sb = std::sin(bearing_bias);
  Eigen::VectorXd u(2 * n);
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector2d e = goals[assignment[i]] - positions[i];
    const SiCommand c = saturate(
        SiCommand{kp * (cb * e.x() - sb * e.y()), kp * (sb * e.x() + cb * e.y())},
        alpha_bound);
    u[2 * i] = c.ux;
    u[2 * i + 1] = c.uy;
  }
  return u;
}

Eigen::VectorXd compute(const ControllerSpec& spec, const SwarmState& observed,
                        ControllerState& cstate) {
  const int n = static_cast<int>(observed.size());
  std::vector<Eigen::Vector2d> positions(n);
  for (int i = 0; i < n; ++i) {
    positions[i] = {observed.poses[i].x1, observed.poses[i].x2};
  }

  switch (spec.kind) {
    case ControllerKind::go_to_goal: {
      Eigen::VectorXd u(2 * n);
      for (int i = 0; i < n; ++i) {
        const Eigen::Vector2d goal =
            i < static_cast<int>(spec.goals.size()) ? spec.goals[i] : positions[i];
        const SiCommand c = go_to_goal(positions[i], goal, spec.kp, spec.alpha_bound);
        u[2 * i] = c.ux;
        u[2 * i + 1] = c.uy;
      }
      return u;
    }
    case ControllerKind::waypoint_follow: {
      if (spec.waypoints.empty()) {
        throw std::invalid_argument("waypoint_follow: empty waypoint list");
      }
      if (cstate.waypoint_index.size() != static_cast<std::size_t>(n)) {
        cstate.waypoint_index.assign(n, 0);
      }
      Eigen::VectorXd u(2 * n);
      for (int i = 0; i < n; ++i) {
        std::size_t& wi = cstate.waypoint_index[i];
        Eigen::Vector2d wp = spec.waypoints[wi % spec.waypoints.size()];
        if ((wp - positions[i]).norm() < spec.reach_tolerance) {
          wi = (wi + 1) % spec.waypoints.size();
          wp = spec.waypoints[wi];
        }
        const UnicycleCommand uc =
            waypoint_follow(observed.poses[i], wp, spec.k1, spec.k2);
        const SiCommand c = uni_to_si(uc, observed.poses[i], spec.lookahead);
        const SiCommand sat = saturate(c, spec.alpha_bound);
        u[2 * i] = sat.ux;
        u[2 * i + 1] = sat.uy;
      }
      return u;
    }
    case ControllerKind::position_swap: {
      std::vector<int> assignment = spec.assignment;
      if (assignment.empty()) {
        // Default antipodal pairing.
        assignment.resize(n);
        for (int i = 0; i < n; ++i) assignment[i] = (i + n / 2) % n;
      }
      const std::vector<Eigen::Vector2d>& goals =
          spec.goals.empty() ? positions : spec.goals;
      return position_swap(positions, goals, assignment, spec.kp, spec.alpha_bound,
                           spec.bearing_bias);
    }
    case ControllerKind::consensus: {
      Eigen::MatrixXd w = spec.weights;
      if (w.size() == 0) {
        w = Eigen::MatrixXd::Constant(n, n, spec.consensus_weight);
        w.diagonal().setZero();
      }
      if (w.rows() != n || w.cols() != n || !w.isApprox(w.transpose()) ||
          w.minCoeff() < 0.0) {
        throw std::invalid_argument("consensus: weights must be symmetric nonnegative NxN");
      }
      return consensus(positions, w, spec.alpha_bound);
    }
    case ControllerKind::cyclic_formation:
      return cyclic_formation(positions, spec.radius, spec.radial_gain,
                              spec.rotation_gain, spec.alpha_bound);
  }
  throw std::logic_error("unreachable controller kind");
}

}  // namespace safesim::controllers
