#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "safesim/scenario.hpp"

namespace safesim::simulator {

struct TickRobotRecord {
  RobotPose pose;      // state at the start of the tick
  SiCommand u_hat;     // desired command
  SiCommand u_star;    // executed (filtered) command
  bool collide = false;
  double v_before = 0.0;  // m/s, speed entering contact resolution
  double v_after = 0.0;   // m/s, speed after contact resolution
  double e_loss = 0.0;    // J, kinetic energy removed this tick
};

struct TickRecord {
  double t = 0.0;
  std::vector<TickRobotRecord> robots;
};

struct TrajectoryLog {
  std::vector<TickRecord> ticks;
  int n = 0;
  bool aborted = false;
  std::string error;
};

struct ContactResult {
  std::vector<bool> indicators;
  std::vector<double> v_before;
  std::vector<double> v_after;
  std::vector<double> e_loss;  // J per robot, >= 0
};

/// Inelastic contact resolution on overlapping discs and wall penetrations:
/// the interpenetrating velocity component is removed, positions are
/// de-penetrated along the contact normal, and per-robot kinetic energy loss
/// is reported. `velocities` is modified in place (x,y per robot).
ContactResult resolve_contacts(SwarmState& state,
                               std::vector<Eigen::Vector2d>& velocities,
                               const CollisionModel& collision,
                               const barrier::Workspace& ws);

/// Closed-loop run: observe (noisy) -> controller -> optional filter ->
/// si_to_uni -> Euler step -> resolve contacts -> log. Deterministic given
/// the scenario (including its seed). The scenario must be resolved and valid.
TrajectoryLog run(const ScenarioConfig& scenario);

/// Append `count` simulated robots, placed collision-free by a seed derived
/// from the scenario's placement seed. They are indistinguishable to
/// controllers and to the barrier filter from the original robots.
ScenarioConfig add_virtual_robots(const ScenarioConfig& scenario, int count);

struct RunSummary {
  double min_pairwise_distance = 0.0;
  int contact_ticks = 0;
  double total_damage = 0.0;  // J
};

RunSummary summarize(const TrajectoryLog& log);

/// Provenance header lines (config hash, seed, version), '#'-prefixed in CSV.
struct OutputHeader {
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  std::string version;
};

void write_csv(const TrajectoryLog& log, std::ostream& out, const OutputHeader& hdr);
void write_jsonl(const TrajectoryLog& log, std::ostream& out, const OutputHeader& hdr);

/// Parse the trajectory CSV schema back into a log (commands and contact
/// columns included). Throws std::runtime_error naming the offending column.
TrajectoryLog read_csv(std::istream& in);

}  // namespace safesim::simulator
