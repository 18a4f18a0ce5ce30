#pragma once

#include <Eigen/Dense>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "safesim/model.hpp"

namespace safesim::controllers {

enum class ControllerKind {
  go_to_goal,
  waypoint_follow,
  position_swap,
  consensus,
  cyclic_formation,
};

ControllerKind kind_from_string(const std::string& s);
std::string to_string(ControllerKind kind);

struct ControllerSpec {
  ControllerKind kind = ControllerKind::go_to_goal;

  // go_to_goal / position_swap
  std::vector<Eigen::Vector2d> goals;
  double kp = 1.0;
  std::vector<int> assignment;  // permutation; robot i heads to goals[assignment[i]]
  double bearing_bias = 0.15;   // rad CCW; breaks symmetric filter gridlock

  // waypoint_follow
  std::vector<Eigen::Vector2d> waypoints;  // shared track, traversed cyclically
  double k1 = 1.0;
  double k2 = 3.0;
  double reach_tolerance = 0.005;  // m

  // consensus
  Eigen::MatrixXd weights;  // symmetric, nonnegative; empty => complete graph
  double consensus_weight = 1.0;

  // cyclic_formation
  double radius = 0.2;
  double radial_gain = 1.0;
  double rotation_gain = 1.0;

  double alpha_bound = 0.1;
  double lookahead = kDefaultLookahead;
};

/// Explicit controller state (waypoint progress); threaded by the caller.
struct ControllerState {
  std::vector<std::size_t> waypoint_index;
};

SiCommand go_to_goal(const Eigen::Vector2d& x, const Eigen::Vector2d& goal,
                     double kp, double alpha_bound);

/// Polar-coordinate closed-loop tracking of a single waypoint.
UnicycleCommand waypoint_follow(const RobotPose& pose, const Eigen::Vector2d& waypoint,
                                double k1, double k2,
                                double v_max = kDefaultVMax,
                                double w_max = kDefaultWMax);

Eigen::VectorXd consensus(const std::vector<Eigen::Vector2d>& positions,
                          const Eigen::MatrixXd& weights, double alpha_bound);

/// Radial regulation plus angular-gap equalization about the centroid; vanishes
/// on a regular N-gon at the target radius.
Eigen::VectorXd cyclic_formation(const std::vector<Eigen::Vector2d>& positions,
                                 double radius, double radial_gain,
                                 double rotation_gain, double alpha_bound);

/// Proportional drive to permuted goals. The error vector is rotated by
/// bearing_bias: crossing swaps under a safety filter admit a gridlocked
/// equilibrium where the projected command is exactly zero, and a common
/// counterclockwise bias (everyone passes on the same side) destroys that
/// equilibrium while still vanishing at the goal.
Eigen::VectorXd position_swap(const std::vector<Eigen::Vector2d>& positions,
                              const std::vector<Eigen::Vector2d>& goals,
                              const std::vector<int>& assignment, double kp,
                              double alpha_bound, double bearing_bias = 0.15);

/// Dispatch: stacked single-integrator command for the whole swarm. Unicycle
/// controllers are mapped through the lookahead point's forward map so the
/// output is always filterable.
Eigen::VectorXd compute(const ControllerSpec& spec, const SwarmState& observed,
                        ControllerState& cstate);

}  // namespace safesim::controllers
