#include "safesim/model.hpp"

#include <algorithm>

namespace safesim {

SiCommand saturate(const SiCommand& cmd, double alpha_bound) {
  return {std::clamp(cmd.ux, -alpha_bound, alpha_bound),
          std::clamp(cmd.uy, -alpha_bound, alpha_bound)};
}

UnicycleCommand saturate(const UnicycleCommand& cmd, double v_max, double w_max) {
  return {std::clamp(cmd.v, -v_max, v_max), std::clamp(cmd.w, -w_max, w_max)};
}

PoseRate unicycle_derivative(const RobotPose& pose, const UnicycleCommand& cmd,
                             const ModelCoefficients& coeffs) {
  if (!pose.finite() || !cmd.finite()) {
    throw std::invalid_argument("unicycle_derivative: non-finite pose or command");
  }
  return {coeffs.a1 * cmd.v * std::cos(pose.x3),
          coeffs.a2 * cmd.v * std::sin(pose.x3),
          coeffs.a3 * cmd.w};
}

UnicycleCommand si_to_uni(const SiCommand& cmd, const RobotPose& pose,
                          double lookahead, double v_max, double w_max) {
  if (!(lookahead > 0.0)) {
    throw std::invalid_argument("si_to_uni: lookahead must be positive");
  }
  const double c = std::cos(pose.x3);
  const double s = std::sin(pose.x3);
  UnicycleCommand out{c * cmd.ux + s * cmd.uy,
                      (-s * cmd.ux + c * cmd.uy) / lookahead};
  return saturate(out, v_max, w_max);
}

SiCommand uni_to_si(const UnicycleCommand& cmd, const RobotPose& pose,
                    double lookahead) {
  const double c = std::cos(pose.x3);
  const double s = std::sin(pose.x3);
  return {cmd.v * c - lookahead * cmd.w * s,
          cmd.v * s + lookahead * cmd.w * c};
}

SwarmState step(const SwarmState& state, const std::vector<UnicycleCommand>& cmds,
                double dt, const ModelCoefficients& coeffs) {
  if (cmds.size() != state.poses.size()) {
    throw std::invalid_argument("step: command count does not match robot count");
  }
  if (!(dt > 0.0)) {
    throw std::invalid_argument("step: dt must be positive");
  }
  SwarmState next = state;
  for (std::size_t i = 0; i < cmds.size(); ++i) {
    const PoseRate rate = unicycle_derivative(state.poses[i], cmds[i], coeffs);
    next.poses[i].x1 += dt * rate.dx1;
    next.poses[i].x2 += dt * rate.dx2;
    next.poses[i].x3 = wrap_angle(next.poses[i].x3 + dt * rate.dx3);
  }
  next.time += dt;
  return next;
}

}  // namespace safesim
