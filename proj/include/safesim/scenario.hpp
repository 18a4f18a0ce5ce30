#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "safesim/barrier.hpp"
#include "safesim/controllers.hpp"
#include "safesim/model.hpp"

namespace safesim {

struct NoiseModel {
  double sigma_dynamics = 0.0;  // m/s, added to pose-rate components
  double sigma_init = 0.0;      // m, initial-position perturbation
  double sigma_obs = 0.0;       // m, observation noise fed to the controller
  std::uint64_t seed = 0;       // fully determines every draw

  bool valid() const {
    return sigma_dynamics >= 0.0 && sigma_init >= 0.0 && sigma_obs >= 0.0;
  }
};

/// Disc contact model; restitution is fixed at 0 (perfectly inelastic).
struct CollisionModel {
  double robot_radius = 0.04;  // m, default ds/2
  double mass = kRobotMass;    // kg
};

struct SafetyThresholds {
  double d_max_total = std::numeric_limits<double>::quiet_NaN();       // J
  double d_max_individual = std::numeric_limits<double>::quiet_NaN();  // J
  int runs = 50;

  bool valid() const {
    return d_max_total > 0.0 && d_max_individual > 0.0 && runs >= 1;
  }
};

enum class FilterMode { off, centralized, decentralized };

FilterMode filter_mode_from_string(const std::string& s);
std::string to_string(FilterMode m);

enum class InitKind { explicit_poses, circle, grid, random };

struct ScenarioConfig {
  int robot_count = 0;
  int virtual_count = 0;  // appended simulated robots; identical to the rest
  InitKind init_kind = InitKind::explicit_poses;
  std::vector<RobotPose> poses;  // explicit initializer, or resolved output
  double circle_radius = 0.35;
  double grid_spacing = 0.13;
  std::uint64_t placement_seed = 0;

  barrier::Workspace workspace;
  barrier::BarrierParams barrier_params;
  FilterMode filter_mode = FilterMode::off;
  controllers::ControllerSpec controller;

  double duration = 10.0;  // s
  double dt = kDefaultDt;
  NoiseModel noise;
  SafetyThresholds thresholds;
  ModelCoefficients coefficients = nominal_coefficients();
  CollisionModel collision;
  double lookahead = kDefaultLookahead;
  double v_max = kDefaultVMax;
  double w_max = kDefaultWMax;

  std::string output_csv;
  std::string output_jsonl;
  std::string output_report;
};

struct ValidationIssue {
  std::string field;
  std::string message;
};

/// Resolve generator-based initial poses (and virtual robots) into an explicit
/// pose list stored in config.poses; idempotent for explicit poses.
void resolve_initial_poses(ScenarioConfig& config);

/// Full-document validation; returns every violation (empty means valid).
/// Expects resolve_initial_poses to have run.
std::vector<ValidationIssue> validate(const ScenarioConfig& config);

/// Parse a YAML scenario file. Parse failures are reported as issues with
/// field "file". Does not validate; callers run resolve + validate.
ScenarioConfig load_scenario_file(const std::string& path,
                                  std::vector<ValidationIssue>& issues);

/// FNV-1a hash of the raw file bytes, for provenance headers.
std::uint64_t file_hash(const std::string& path);

}  // namespace safesim
