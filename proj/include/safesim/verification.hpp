#pragma once

#include <string>
#include <utility>
#include <vector>

#include "safesim/simulator.hpp"

namespace safesim::verification {

struct RunScore {
  std::uint64_t seed = 0;
  double damage_total = 0.0;          // J
  std::vector<double> damage_per_robot;
  double score_total = 1.0;           // S
  std::vector<double> score_per_robot;
};

struct SafetyReport {
  std::uint64_t master_seed = 0;
  int runs = 0;
  std::vector<RunScore> per_run;
  double mean_score = 1.0;
  std::vector<double> mean_score_per_robot;
  double worst_score = 1.0;
  double worst_score_per_robot = 1.0;
  bool pass = false;  // pass-unfiltered
  std::string verdict;  // "pass-unfiltered" | "fail-requires-barriers"
  std::string diagnostics;
};

/// Discrete work-energy damage: per-tick kinetic-energy loss on colliding
/// ticks, negative terms clamped to zero. Returns (D, D_i).
std::pair<double, std::vector<double>> damage(const simulator::TrajectoryLog& log,
                                              double mass, double dt);

/// S = 1 - D/D_max; s_i = 1 - D_i/d_max_individual.
std::pair<double, std::vector<double>> score(double damage_total,
                                             const std::vector<double>& damage_per_robot,
                                             const SafetyThresholds& thresholds);

/// Monte Carlo gate: `thresholds.runs` rollouts with per-run seeds derived
/// from noise.seed; verdict pass-unfiltered iff mean S > 0 and every mean
/// s_i > 0. Reproducible byte-for-byte for a fixed master seed.
SafetyReport verify(const ScenarioConfig& scenario, const SafetyThresholds& thresholds,
                    const NoiseModel& noise);

std::string to_json(const SafetyReport& report);
std::string to_text(const SafetyReport& report);

}  // namespace safesim::verification
