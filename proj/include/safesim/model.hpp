#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace safesim {

inline constexpr double kDefaultDt = 1.0 / 30.0;     // tracking update rate
inline constexpr double kDefaultVMax = 0.1;          // m/s
inline constexpr double kDefaultLookahead = 0.05;    // m, inversion offset
inline constexpr double kDefaultWMax = 2.0 * kDefaultVMax / kDefaultLookahead;
inline constexpr double kRobotMass = 0.06;           // kg

/// Wrap an angle into (-pi, pi].
inline double wrap_angle(double theta) {
  double w = std::remainder(theta, 2.0 * M_PI);
  if (w <= -M_PI) w = M_PI;
  return w;
}

struct RobotPose {
  double x1 = 0.0;  // m
  double x2 = 0.0;  // m
  double x3 = 0.0;  // rad, kept in (-pi, pi]

  bool finite() const {
    return std::isfinite(x1) && std::isfinite(x2) && std::isfinite(x3);
  }
};

struct SwarmState {
  std::vector<RobotPose> poses;
  double time = 0.0;  // s

  std::size_t size() const { return poses.size(); }
};

/// Planar single-integrator velocity command for one robot.
struct SiCommand {
  double ux = 0.0;  // m/s
  double uy = 0.0;  // m/s

  bool finite() const { return std::isfinite(ux) && std::isfinite(uy); }
};

/// Differential-drive velocity command.
struct UnicycleCommand {
  double v = 0.0;  // m/s
  double w = 0.0;  // rad/s

  bool finite() const { return std::isfinite(v) && std::isfinite(w); }
};

/// Per-axis scaling of the nominal unicycle model, fitted by regression.
struct ModelCoefficients {
  double a1 = 0.8645;
  double a2 = 0.8119;
  double a3 = 0.4640;

  bool valid() const { return a1 > 0.0 && a2 > 0.0 && a3 > 0.0; }
};

inline ModelCoefficients nominal_coefficients() { return {1.0, 1.0, 1.0}; }

struct PoseRate {
  double dx1 = 0.0;  // m/s
  double dx2 = 0.0;  // m/s
  double dx3 = 0.0;  // rad/s
};

/// Component-wise clamp to the infinity-norm ball of radius alpha_bound.
SiCommand saturate(const SiCommand& cmd, double alpha_bound);

UnicycleCommand saturate(const UnicycleCommand& cmd, double v_max, double w_max);

/// Pose rate of the (coefficient-scaled) unicycle model.
/// Throws std::invalid_argument on non-finite pose or command.
PoseRate unicycle_derivative(const RobotPose& pose, const UnicycleCommand& cmd,
                             const ModelCoefficients& coeffs);

/// Exact inversion of the motion of the point `lookahead` meters ahead of the
/// wheel axis: the returned (v, w) makes that point track (ux, uy), then both
/// are saturated. Throws std::invalid_argument when lookahead <= 0.
UnicycleCommand si_to_uni(const SiCommand& cmd, const RobotPose& pose,
                          double lookahead, double v_max = kDefaultVMax,
                          double w_max = kDefaultWMax);

/// Forward map of the lookahead point: planar velocity it attains under (v, w).
SiCommand uni_to_si(const UnicycleCommand& cmd, const RobotPose& pose,
                    double lookahead);

/// One explicit Euler step of the whole swarm; headings renormalized.
SwarmState step(const SwarmState& state, const std::vector<UnicycleCommand>& cmds,
                double dt, const ModelCoefficients& coeffs = nominal_coefficients());

}  // namespace safesim
