#include "safesim/verification.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "safesim/rng.hpp"

namespace safesim::verification {

std::pair<double, std::vector<double>> damage(const simulator::TrajectoryLog& log,
                                              double mass, double /*dt*/) {
  std::vector<double> per_robot(log.n, 0.0);
  for (const auto& tick : log.ticks) {
    for (std::size_t i = 0; i < tick.robots.size(); ++i) {
      const auto& r = tick.robots[i];
      if (!r.collide) continue;
      const double term =
          0.5 * mass * (r.v_before * r.v_before - r.v_after * r.v_after);
      per_robot[i] += std::max(0.0, term);
    }
  }
  double total = 0.0;
  for (double d : per_robot) total += d;
  return {total, per_robot};
}

std::pair<double, std::vector<double>> score(double damage_total,
                                             const std::vector<double>& damage_per_robot,
                                             const SafetyThresholds& thresholds) {
  if (!thresholds.valid()) throw std::invalid_argument("score: invalid thresholds");
  std::vector<double> si(damage_per_robot.size());
  for (std::size_t i = 0; i < si.size(); ++i) {
    si[i] = 1.0 - damage_per_robot[i] / thresholds.d_max_individual;
  }
  return {1.0 - damage_total / thresholds.d_max_total, si};
}

SafetyReport verify(const ScenarioConfig& scenario, const SafetyThresholds& thresholds,
                    const NoiseModel& noise) {
  if (!thresholds.valid()) throw std::invalid_argument("verify: invalid thresholds");
  const int n = static_cast<int>(scenario.poses.size());
  SafetyReport report;
  report.master_seed = noise.seed;
  report.runs = thresholds.runs;
  report.mean_score_per_robot.assign(n, 0.0);
  report.worst_score = std::numeric_limits<double>::infinity();
  report.worst_score_per_robot = std::numeric_limits<double>::infinity();

  double sum_s = 0.0;
  for (int r = 0; r < thresholds.runs; ++r) {
    ScenarioConfig rollout = scenario;
    rollout.noise = noise;
    rollout.noise.seed = rng::derive_seed(noise.seed, static_cast<std::uint64_t>(r));

    const simulator::TrajectoryLog log = simulator::run(rollout);
    if (log.aborted) {
      report.pass = false;
      report.verdict = "fail-requires-barriers";
      report.diagnostics = "run " + std::to_string(r) + " aborted: " + log.error;
      return report;
    }
    auto [d_total, d_robot] = damage(log, scenario.collision.mass, scenario.dt);
    auto [s_total, s_robot] = score(d_total, d_robot, thresholds);

    RunScore rs;
    rs.seed = rollout.noise.seed;
    rs.damage_total = d_total;
    rs.damage_per_robot = std::move(d_robot);
    rs.score_total = s_total;
    rs.score_per_robot = std::move(s_robot);

    sum_s += rs.score_total;
    report.worst_score = std::min(report.worst_score, rs.score_total);
    for (int i = 0; i < n; ++i) {
      report.mean_score_per_robot[i] += rs.score_per_robot[i];
      report.worst_score_per_robot =
          std::min(report.worst_score_per_robot, rs.score_per_robot[i]);
    }
    report.per_run.push_back(std::move(rs));
  }

  report.mean_score = sum_s / thresholds.runs;
  for (double& s : report.mean_score_per_robot) s /= thresholds.runs;

  // The gate is on expected values; worst-run scores are diagnostics only.
  bool pass = report.mean_score > 0.0;
  for (double s : report.mean_score_per_robot) pass = pass && s > 0.0;
  report.pass = pass;
  report.verdict = pass ? "pass-unfiltered" : "fail-requires-barriers";
  return report;
}

std::string to_json(const SafetyReport& report) {
  nlohmann::json j;
  j["master_seed"] = report.master_seed;
  j["runs"] = report.runs;
  j["mean_score"] = report.mean_score;
  j["mean_score_per_robot"] = report.mean_score_per_robot;
  j["worst_score"] = report.worst_score;
  j["worst_score_per_robot"] = report.worst_score_per_robot;
  j["pass"] = report.pass;
  j["verdict"] = report.verdict;
  if (!report.diagnostics.empty()) j["diagnostics"] = report.diagnostics;
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& r : report.per_run) {
    runs.push_back({{"seed", r.seed},
                    {"damage_total", r.damage_total},
                    {"damage_per_robot", r.damage_per_robot},
                    {"score_total", r.score_total},
                    {"score_per_robot", r.score_per_robot}});
  }
  j["per_run"] = runs;
  return j.dump(2);
}

std::string to_text(const SafetyReport& report) {
  std::ostringstream out;
  out << "safety verification: " << report.verdict << "\n";
  out << "  runs:        " << report.runs << " (master seed " << report.master_seed
      << ")\n";
  out << "  mean S:      " << report.mean_score << "\n";
  out << "  worst-run S: " << report.worst_score << "\n";
  out << "  worst s_i:   " << report.worst_score_per_robot << "\n";
  if (!report.diagnostics.empty()) out << "  diagnostics: " << report.diagnostics << "\n";
  return out.str();
}

}  // namespace safesim::verification
