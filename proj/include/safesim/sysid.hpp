#pragma once

#include <Eigen/Dense>
#include <vector>

#include "safesim/model.hpp"

namespace safesim::sysid {

/// Paired pose-rate samples: model evaluations vs. Euler-differenced
/// observations, one column per axis (x1, x2, x3).
struct RegressionDataset {
  Eigen::MatrixX3d model_rates;
  Eigen::MatrixX3d observed_rates;

  Eigen::Index size() const { return model_rates.rows(); }
};

/// Per-axis least-squares scaling: a_i = <model_i, observed_i> / <model_i, model_i>.
/// Throws std::invalid_argument naming the axis when a model column has zero
/// sum of squares.
ModelCoefficients fit_coefficients(const RegressionDataset& data);

/// Forward differences of a uniformly sampled pose series; headings are
/// differenced on the circle before division.
Eigen::MatrixX3d rate_observations(const std::vector<RobotPose>& poses, double dt);

/// Average over the real samples of the minimum distance to the simulated
/// trajectory (point-to-polyline, so the metric is invariant to the sim
/// trajectory's time parameterization). Asymmetric by construction.
double trajectory_error(const std::vector<Eigen::Vector2d>& sim,
                        const std::vector<Eigen::Vector2d>& real);

}  // namespace safesim::sysid
