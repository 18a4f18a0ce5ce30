#include "safesim/sysid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace safesim::sysid {

ModelCoefficients fit_coefficients(const RegressionDataset& data) {
  if (data.model_rates.rows() != data.observed_rates.rows() ||
      data.model_rates.rows() < 2) {
    throw std::invalid_argument("fit_coefficients: need matching datasets with d >= 2");
  }
  if (!data.model_rates.allFinite() || !data.observed_rates.allFinite()) {
    throw std::invalid_argument("fit_coefficients: non-finite entries");
  }
  double alpha[3];
  for (int axis = 0; axis < 3; ++axis) {
    const double energy = data.model_rates.col(axis).squaredNorm();
    if (energy == 0.0) {
      throw std::invalid_argument("fit_coefficients: zero-energy model column for axis " +
                                  std::to_string(axis + 1));
    }
    alpha[axis] = data.model_rates.col(axis).dot(data.observed_rates.col(axis)) / energy;
  }
  return {alpha[0], alpha[1], alpha[2]};
}

Eigen::MatrixX3d rate_observations(const std::vector<RobotPose>& poses, double dt) {
  if (poses.size() < 2) {
    throw std::invalid_argument("rate_observations: need at least 2 samples");
  }
  if (!(dt > 0.0)) throw std::invalid_argument("rate_observations: dt must be positive");
  Eigen::MatrixX3d rates(poses.size() - 1, 3);
  for (std::size_t k = 0; k + 1 < poses.size(); ++k) {
    rates(k, 0) = (poses[k + 1].x1 - poses[k].x1) / dt;
    rates(k, 1) = (poses[k + 1].x2 - poses[k].x2) / dt;
    rates(k, 2) = wrap_angle(poses[k + 1].x3 - poses[k].x3) / dt;
  }
  return rates;
}

namespace {

double point_to_segment(const Eigen::Vector2d& p, const Eigen::Vector2d& a,
                        const Eigen::Vector2d& b) {
  const Eigen::Vector2d ab = b - a;
  const double len_sq = ab.squaredNorm();
  if (len_sq == 0.0) return (p - a).norm();
  const double s = std::clamp((p - a).dot(ab) / len_sq, 0.0, 1.0);
  return (p - (a + s * ab)).norm();
}

}  // namespace

double trajectory_error(const std::vector<Eigen::Vector2d>& sim,
                        const std::vector<Eigen::Vector2d>& real) {
  if (sim.empty() || real.empty()) {
    throw std::invalid_argument("trajectory_error: empty trajectory");
  }
  double sum = 0.0;
  for (const auto& p : real) {
    double best = std::numeric_limits<double>::infinity();
    if (sim.size() == 1) {
      best = (p - sim.front()).norm();
    } else {
      for (std::size_t k = 0; k + 1 < sim.size(); ++k) {
        best = std::min(best, point_to_segment(p, sim[k], sim[k + 1]));
      }
    }
    sum += best;
  }
  return sum / static_cast<double>(real.size());
}

}  // namespace safesim::sysid
