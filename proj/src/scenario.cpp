#include "safesim/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "safesim/rng.hpp"

namespace safesim {

FilterMode filter_mode_from_string(const std::string& s) {
  if (s == "off") return FilterMode::off;
  if (s == "centralized") return FilterMode::centralized;
  if (s == "decentralized") return FilterMode::decentralized;
  throw std::invalid_argument("unknown barrier mode: " + s);
}

std::string to_string(FilterMode m) {
  switch (m) {
    case FilterMode::off: return "off";
    case FilterMode::centralized: return "centralized";
    case FilterMode::decentralized: return "decentralized";
  }
  return "?";
}

namespace {

std::vector<RobotPose> generate_poses(const ScenarioConfig& c, int count) {
  std::vector<RobotPose> poses;
  switch (c.init_kind) {
    case InitKind::explicit_poses:
      poses = c.poses;
      break;
    case InitKind::circle:
      for (int i = 0; i < count; ++i) {
        const double a = 2.0 * M_PI * i / count;
        poses.push_back({c.circle_radius * std::cos(a),
                         c.circle_radius * std::sin(a), 0.0});
      }
      break;
    case InitKind::grid: {
      const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(count))));
      const int rows = (count + cols - 1) / cols;
      for (int i = 0; i < count; ++i) {
        const int gx = i % cols;
        const int gy = i / cols;
        poses.push_back({(gx - 0.5 * (cols - 1)) * c.grid_spacing,
                         (gy - 0.5 * (rows - 1)) * c.grid_spacing, 0.0});
      }
      break;
    }
    case InitKind::random: {
      const double margin = c.barrier_params.boundary_margin + c.collision.robot_radius;
      for (int i = 0; i < count; ++i) {
        RobotPose p;
        bool placed = false;
        for (std::uint64_t attempt = 0; attempt < 10000; ++attempt) {
          p.x1 = rng::uniform_in(c.placement_seed, c.workspace.xmin + margin,
                                 c.workspace.xmax - margin, i, attempt, 0);
          p.x2 = rng::uniform_in(c.placement_seed, c.workspace.ymin + margin,
                                 c.workspace.ymax - margin, i, attempt, 1);
          p.x3 = wrap_angle(2.0 * M_PI *
                            rng::uniform(c.placement_seed, i, attempt, 2));
          placed = true;
          for (const auto& q : poses) {
            if (std::hypot(p.x1 - q.x1, p.x2 - q.x2) <
                c.barrier_params.ds + 0.01) {
              placed = false;
              break;
            }
          }
          if (placed) break;
        }
        if (!placed) {
          throw std::runtime_error("random placement failed: workspace too dense");
        }
        poses.push_back(p);
      }
      break;
    }
  }
  return poses;
}

}  // namespace

void resolve_initial_poses(ScenarioConfig& config) {
  if (config.init_kind != InitKind::explicit_poses) {
    config.poses = generate_poses(config, config.robot_count);
    config.init_kind = InitKind::explicit_poses;
  }
  config.robot_count = static_cast<int>(config.poses.size());
  // Default goals for swap/go-to-goal controllers reference initial positions.
  if (config.controller.kind == controllers::ControllerKind::position_swap &&
      config.controller.goals.empty()) {
    for (const auto& p : config.poses) {
      config.controller.goals.push_back({p.x1, p.x2});
    }
  }
}

std::vector<ValidationIssue> validate(const ScenarioConfig& c) {
  std::vector<ValidationIssue> issues;
  const auto add = [&](const std::string& field, const std::string& msg) {
    issues.push_back({field, msg});
  };

  const int n = static_cast<int>(c.poses.size());
  if (n < 1) add("robots.count", "at least one robot required");
  if (!(c.duration > 0.0)) add("duration", "must be positive");
  if (!(c.dt > 0.0)) add("dt", "must be positive");
  if (!c.barrier_params.valid()) add("barrier", "invalid barrier parameters");
  if (!c.workspace.valid(c.barrier_params.ds)) {
    add("workspace", "workspace must exceed 2*ds in both dimensions");
  }
  if (!c.noise.valid()) add("noise", "sigmas must be nonnegative");
  if (!c.thresholds.valid()) {
    add("thresholds", "d_max_total, d_max_individual must be positive and runs >= 1");
  }
  if (!c.coefficients.valid()) add("coefficients", "must be strictly positive");
  if (!(c.lookahead > 0.0)) add("lookahead", "must be positive");
  if (!(c.v_max > 0.0) || !(c.w_max > 0.0)) add("limits", "v_max/w_max must be positive");
  if (!(2.0 * c.collision.robot_radius <= c.barrier_params.ds)) {
    add("collision.robot_radius", "2*robot_radius must not exceed ds");
  }

  for (int i = 0; i < n; ++i) {
    if (!c.poses[i].finite()) {
      add("robots.poses[" + std::to_string(i) + "]", "non-finite pose");
    } else if (!c.workspace.contains(c.poses[i].x1, c.poses[i].x2)) {
      add("robots.poses[" + std::to_string(i) + "]", "outside workspace");
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double d = std::hypot(c.poses[i].x1 - c.poses[j].x1,
                                  c.poses[i].x2 - c.poses[j].x2);
      if (d < c.barrier_params.ds) {
        add("robots.poses", "robots (" + std::to_string(i) + "," +
                                std::to_string(j) + ") closer than ds");
      }
    }
  }

  using controllers::ControllerKind;
  const auto& ctl = c.controller;
  // Robots beyond the goal list (e.g. appended virtual robots) hold position.
  if (ctl.kind == ControllerKind::go_to_goal &&
      (ctl.goals.empty() || static_cast<int>(ctl.goals.size()) > n)) {
    add("controller.goals", "go_to_goal requires between 1 and N goals");
  }
  if (ctl.kind == ControllerKind::waypoint_follow && ctl.waypoints.empty()) {
    add("controller.waypoints", "waypoint_follow requires a waypoint list");
  }
  if (ctl.kind == ControllerKind::cyclic_formation && n < 3) {
    add("controller", "cyclic_formation requires N >= 3");
  }
  if (ctl.kind == ControllerKind::position_swap && !ctl.assignment.empty()) {
    std::vector<bool> seen(n, false);
    bool ok = static_cast<int>(ctl.assignment.size()) == n;
    for (int a : ctl.assignment) {
      if (!ok) break;
      if (a < 0 || a >= n || seen[a]) ok = false;
      else seen[a] = true;
    }
    if (!ok) add("controller.assignment", "not a permutation of 0..N-1");
  }
  return issues;
}

namespace {

template <typename T>
void read(const YAML::Node& node, const char* key, T& out) {
  if (node && node[key]) out = node[key].as<T>();
}

Eigen::Vector2d as_vec2(const YAML::Node& node) {
  return {node[0].as<double>(), node[1].as<double>()};
}

}  // namespace

ScenarioConfig load_scenario_file(const std::string& path,
                                  std::vector<ValidationIssue>& issues) {
  ScenarioConfig c;
  YAML::Node root;
  try {
    root = YAML::LoadFile(path);
  } catch (const std::exception& e) {
    issues.push_back({"file", e.what()});
    return c;
  }
  try {
    const YAML::Node robots = root["robots"];
    if (robots) {
      read(robots, "count", c.robot_count);
      read(robots, "virtual", c.virtual_count);
      std::string init = "circle";
      read(robots, "init", init);
      if (init == "circle") c.init_kind = InitKind::circle;
      else if (init == "grid") c.init_kind = InitKind::grid;
      else if (init == "random") c.init_kind = InitKind::random;
      else if (init == "poses") c.init_kind = InitKind::explicit_poses;
      else issues.push_back({"robots.init", "unknown generator: " + init});
      read(robots, "circle_radius", c.circle_radius);
      read(robots, "grid_spacing", c.grid_spacing);
      read(robots, "placement_seed", c.placement_seed);
      if (robots["poses"]) {
        for (const auto& p : robots["poses"]) {
          c.poses.push_back({p[0].as<double>(), p[1].as<double>(),
                             p.size() > 2 ? p[2].as<double>() : 0.0});
        }
      }
    } else {
      issues.push_back({"robots", "missing section"});
    }

    if (const YAML::Node ws = root["workspace"]) {
      read(ws, "xmin", c.workspace.xmin);
      read(ws, "xmax", c.workspace.xmax);
      read(ws, "ymin", c.workspace.ymin);
      read(ws, "ymax", c.workspace.ymax);
    }

    if (const YAML::Node b = root["barrier"]) {
      std::string mode = "off";
      read(b, "mode", mode);
      try {
        c.filter_mode = filter_mode_from_string(mode);
      } catch (const std::exception& e) {
        issues.push_back({"barrier.mode", e.what()});
      }
      read(b, "ds", c.barrier_params.ds);
      read(b, "gamma", c.barrier_params.gamma);
      read(b, "alpha_bound", c.barrier_params.alpha_bound);
      read(b, "neighbor_radius", c.barrier_params.neighbor_radius);
      read(b, "boundary_margin", c.barrier_params.boundary_margin);
    }

    if (const YAML::Node ctl = root["controller"]) {
      std::string kind = "go_to_goal";
      read(ctl, "kind", kind);
      try {
        c.controller.kind = controllers::kind_from_string(kind);
      } catch (const std::exception& e) {
        issues.push_back({"controller.kind", e.what()});
      }
      read(ctl, "kp", c.controller.kp);
      read(ctl, "bearing_bias", c.controller.bearing_bias);
      read(ctl, "k1", c.controller.k1);
      read(ctl, "k2", c.controller.k2);
      read(ctl, "radius", c.controller.radius);
      read(ctl, "radial_gain", c.controller.radial_gain);
      read(ctl, "rotation_gain", c.controller.rotation_gain);
      read(ctl, "consensus_weight", c.controller.consensus_weight);
      read(ctl, "reach_tolerance", c.controller.reach_tolerance);
      if (ctl["goals"]) {
        for (const auto& g : ctl["goals"]) c.controller.goals.push_back(as_vec2(g));
      }
      if (ctl["waypoints"]) {
        for (const auto& w : ctl["waypoints"]) {
          c.controller.waypoints.push_back(as_vec2(w));
        }
      }
      if (ctl["assignment"]) {
        for (const auto& a : ctl["assignment"]) {
          c.controller.assignment.push_back(a.as<int>());
        }
      }
    }

    read(root, "duration", c.duration);
    read(root, "dt", c.dt);

    if (const YAML::Node nz = root["noise"]) {
      read(nz, "sigma_dynamics", c.noise.sigma_dynamics);
      read(nz, "sigma_init", c.noise.sigma_init);
      read(nz, "sigma_obs", c.noise.sigma_obs);
      read(nz, "seed", c.noise.seed);
    }

    if (const YAML::Node th = root["thresholds"]) {
      read(th, "d_max_total", c.thresholds.d_max_total);
      read(th, "d_max_individual", c.thresholds.d_max_individual);
      read(th, "runs", c.thresholds.runs);
    } else {
      issues.push_back({"thresholds", "missing section (d_max_total, d_max_individual)"});
    }

    if (const YAML::Node co = root["coefficients"]) {
      read(co, "a1", c.coefficients.a1);
      read(co, "a2", c.coefficients.a2);
      read(co, "a3", c.coefficients.a3);
    }

    if (const YAML::Node col = root["collision"]) {
      read(col, "robot_radius", c.collision.robot_radius);
      read(col, "mass", c.collision.mass);
    }

    read(root, "lookahead", c.lookahead);
    read(root, "v_max", c.v_max);
    read(root, "w_max", c.w_max);
    c.controller.alpha_bound = c.barrier_params.alpha_bound;
    c.controller.lookahead = c.lookahead;

    if (const YAML::Node out = root["output"]) {
      read(out, "csv", c.output_csv);
      read(out, "jsonl", c.output_jsonl);
      read(out, "report", c.output_report);
    }
  } catch (const std::exception& e) {
    issues.push_back({"file", e.what()});
  }
  return c;
}

std::uint64_t file_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char ch;
  while (in.get(ch)) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace safesim
