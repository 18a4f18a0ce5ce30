#include <doctest.h>

#include <cmath>

#include "safesim/rng.hpp"
#include "safesim/sysid.hpp"

using namespace safesim;
using namespace safesim::sysid;

TEST_CASE("fit_coefficients solves each axis independently") {
  SUBCASE("perfectly scaled data recovers the scales exactly") {
    RegressionDataset d;
    d.model_rates.resize(4, 3);
    d.model_rates << 0.1, 0.0, 0.5, 0.08, 0.02, -0.3, -0.05, 0.07, 0.1, 0.02,
        -0.04, 0.0;
    d.observed_rates = d.model_rates;
    d.observed_rates.col(0) *= 0.8645;
    d.observed_rates.col(1) *= 0.8119;
    d.observed_rates.col(2) *= 0.4640;
    const auto c = fit_coefficients(d);
    CHECK(c.a1 == doctest::Approx(0.8645).epsilon(1e-12));
    CHECK(c.a2 == doctest::Approx(0.8119).epsilon(1e-12));
    CHECK(c.a3 == doctest::Approx(0.4640).epsilon(1e-12));
  }

  SUBCASE("identity data fits 1") {
    RegressionDataset d;
    d.model_rates.resize(2, 3);
    d.model_rates << 0.1, 0.05, 0.2, -0.02, 0.03, -0.4;
    d.observed_rates = d.model_rates;
    const auto c = fit_coefficients(d);
    CHECK(c.a1 == doctest::Approx(1.0));
    CHECK(c.a2 == doctest::Approx(1.0));
    CHECK(c.a3 == doctest::Approx(1.0));
  }

  SUBCASE("a zero-energy model column is rejected, naming the axis") {
    RegressionDataset d;
    d.model_rates = Eigen::MatrixX3d::Zero(3, 3);
    d.model_rates.col(0).setConstant(0.1);
    d.model_rates.col(2).setConstant(0.2);
    d.observed_rates = d.model_rates;
    CHECK_THROWS_WITH_AS(fit_coefficients(d), doctest::Contains("axis 2"),
                         std::invalid_argument);
  }

  SUBCASE("least-squares worked example") {
    // Single axis with model [1, 2], observed [1, 1]: a = (1+2)/(1+4) = 0.6.
    RegressionDataset d;
    d.model_rates.resize(2, 3);
    d.model_rates << 1, 1, 1, 2, 1, 1;
    d.observed_rates.resize(2, 3);
    d.observed_rates << 1, 1, 1, 1, 1, 1;
    const auto c = fit_coefficients(d);
    CHECK(c.a1 == doctest::Approx(0.6));
    CHECK(c.a2 == doctest::Approx(1.0));
  }
}

TEST_CASE("rate_observations") {
  SUBCASE("forward differences of a linear ramp") {
    std::vector<RobotPose> poses{{0, 0, 0}, {0.01, -0.02, 0.1}, {0.02, -0.04, 0.2}};
    const auto rates = rate_observations(poses, 0.1);
    REQUIRE(rates.rows() == 2);
    CHECK(rates(0, 0) == doctest::Approx(0.1));
    CHECK(rates(0, 1) == doctest::Approx(-0.2));
    CHECK(rates(0, 2) == doctest::Approx(1.0));
    CHECK(rates(1, 0) == doctest::Approx(0.1));
  }

  SUBCASE("heading differences cross the wrap without a 2*pi jump") {
    std::vector<RobotPose> poses{{0, 0, M_PI - 0.01}, {0, 0, -M_PI + 0.01}};
    const auto rates = rate_observations(poses, 0.1);
    CHECK(rates(0, 2) == doctest::Approx(0.2));  // +0.02 rad over 0.1 s
  }
}

TEST_CASE("synthetic closed-loop data recovers the plant coefficients") {
  const ModelCoefficients truth{0.8645, 0.8119, 0.4640};
  const double dt = kDefaultDt;
  const int samples = 30000;

  RobotPose pose{0, 0, 0};
  std::vector<RobotPose> observed_series{pose};
  Eigen::MatrixX3d model(samples, 3);
  for (int k = 0; k < samples; ++k) {
    const UnicycleCommand cmd{
        0.02 + 0.08 * rng::uniform(31, 0, k, 0),
        -2.0 + 4.0 * rng::uniform(31, 0, k, 1),
    };
    const PoseRate nominal = unicycle_derivative(pose, cmd, nominal_coefficients());
    model.row(k) << nominal.dx1, nominal.dx2, nominal.dx3;
    const PoseRate actual = unicycle_derivative(pose, cmd, truth);
    pose.x1 += dt * actual.dx1;
    pose.x2 += dt * actual.dx2;
    pose.x3 = wrap_angle(pose.x3 + dt * actual.dx3);
    observed_series.push_back(pose);
  }
  RegressionDataset d;
  d.model_rates = model;
  d.observed_rates = rate_observations(observed_series, dt);
  const auto c = fit_coefficients(d);
  CHECK(c.a1 == doctest::Approx(truth.a1).epsilon(0.01));
  CHECK(c.a2 == doctest::Approx(truth.a2).epsilon(0.01));
  CHECK(c.a3 == doctest::Approx(truth.a3).epsilon(0.01));
}

TEST_CASE("trajectory_error") {
  SUBCASE("identical trajectories score zero") {
    std::vector<Eigen::Vector2d> line{{0, 0}, {0.1, 0}, {0.2, 0}, {0.3, 0}};
    CHECK(trajectory_error(line, line) == 0.0);
  }

  SUBCASE("parallel offset by 0.01 m measures 0.01 m") {
    std::vector<Eigen::Vector2d> sim, real;
    for (int k = 0; k <= 50; ++k) {
      sim.push_back({0.01 * k, 0.0});
      real.push_back({0.01 * k, 0.01});
    }
    CHECK(trajectory_error(sim, real) == doctest::Approx(0.01).epsilon(0.02));
  }

  SUBCASE("invariant to the sim trajectory's sampling density") {
    std::vector<Eigen::Vector2d> coarse{{0, 0}, {0.5, 0}};
    std::vector<Eigen::Vector2d> fine;
    for (int k = 0; k <= 100; ++k) fine.push_back({0.005 * k, 0.0});
    std::vector<Eigen::Vector2d> real{{0.1, 0.02}, {0.3, 0.02}, {0.45, 0.02}};
    CHECK(trajectory_error(coarse, real) ==
          doctest::Approx(trajectory_error(fine, real)).epsilon(1e-12));
    CHECK(trajectory_error(coarse, real) == doctest::Approx(0.02));
  }

  SUBCASE("projection onto the interior of a segment") {
    std::vector<Eigen::Vector2d> sim{{0, 0}, {1, 0}};
    std::vector<Eigen::Vector2d> real{{0.5, 0.3}};
    CHECK(trajectory_error(sim, real) == doctest::Approx(0.3));
  }

  SUBCASE("asymmetry: sim overshoot beyond the real path is not penalized") {
    std::vector<Eigen::Vector2d> sim{{0, 0}, {2, 0}};
    std::vector<Eigen::Vector2d> real{{0, 0}, {1, 0}};
    CHECK(trajectory_error(sim, real) == 0.0);
    CHECK(trajectory_error(real, sim) > 0.0);
  }

  SUBCASE("scale equivariance") {
    std::vector<Eigen::Vector2d> sim{{0, 0}, {1, 1}, {2, 0}};
    std::vector<Eigen::Vector2d> real{{0.2, 0.1}, {1.1, 0.8}};
    const double base = trajectory_error(sim, real);
    for (auto& p : sim) p *= 3.0;
    for (auto& p : real) p *= 3.0;
    CHECK(trajectory_error(sim, real) == doctest::Approx(3.0 * base).epsilon(1e-12));
  }
}
