// Acceptance suite: one line per criterion, nonzero exit when any fails.
#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "safesim/barrier.hpp"
#include "safesim/rng.hpp"
#include "safesim/scenario.hpp"
#include "safesim/simulator.hpp"
#include "safesim/sysid.hpp"
#include "safesim/verification.hpp"

using namespace safesim;

namespace {

int g_failures = 0;

void report(int index, const char* name, bool ok, const std::string& detail = "") {
  std::printf("%s: %2d %s%s%s\n", ok ? "PASS" : "FAIL", index, name,
              detail.empty() ? "" : " -- ", detail.c_str());
  if (!ok) ++g_failures;
}

double now_ms() {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

ScenarioConfig swap_circle(int n, FilterMode mode) {
  ScenarioConfig c;
  c.init_kind = InitKind::circle;
  c.robot_count = n;
  c.circle_radius = 0.35;
  c.filter_mode = mode;
  c.barrier_params.gamma = 1.0;
  c.barrier_params.ds = 0.08;
  c.controller.kind = controllers::ControllerKind::position_swap;
  c.duration = 60.0;
  c.dt = 1.0 / 30.0;
  c.thresholds = {1e-3, 1e-3, 1};
  resolve_initial_poses(c);
  return c;
}

// Minimum over ticks/pairs of the inter-robot distance.
double min_distance(const simulator::TrajectoryLog& log) {
  return simulator::summarize(log).min_pairwise_distance;
}

double worst_goal_error(const simulator::TrajectoryLog& log,
                        const ScenarioConfig& c) {
  const auto& last = log.ticks.back();
  double worst = 0.0;
  for (std::size_t i = 0; i < last.robots.size(); ++i) {
    const int n = static_cast<int>(last.robots.size());
    const auto& goal = c.controller.goals[(i + n / 2) % n];
    worst = std::max(worst, std::hypot(last.robots[i].pose.x1 - goal.x(),
                                       last.robots[i].pose.x2 - goal.y()));
  }
  return worst;
}

void criterion_1() {
  ScenarioConfig c = swap_circle(10, FilterMode::centralized);
  const double t0 = now_ms();
  const auto log = simulator::run(c);
  const double elapsed_s = (now_ms() - t0) / 1000.0;
  const double dmin = min_distance(log);
  const double goal_err = worst_goal_error(log, c);
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "min dist %.4f m, worst goal error %.4f m, %.1f s wall",
                dmin, goal_err, elapsed_s);
  report(1, "forward invariance: 10-robot antipodal swap, centralized filter",
         !log.aborted && dmin >= 0.079 && goal_err <= 0.02 && elapsed_s < 60.0,
         buf);
}

void criterion_2() {
  // gamma = 10 makes the certificate provably inactive for separations of
  // ds + 0.05 m and in-box commands, so the filter must be an exact no-op.
  barrier::BarrierParams params;
  params.gamma = 10.0;
  barrier::Workspace ws;
  const double wall = params.boundary_margin + 0.012;
  int exact = 0;
  const int kStates = 10000;
  for (int s = 0; s < kStates; ++s) {
    const int n = 2 + static_cast<int>(rng::mix(7, s, 0) % 3);
    SwarmState state;
    for (int i = 0; i < n; ++i) {
      for (std::uint64_t attempt = 0;; ++attempt) {
        RobotPose p{rng::uniform_in(7, ws.xmin + wall, ws.xmax - wall, s, i, 10 + attempt),
                    rng::uniform_in(7, ws.ymin + wall, ws.ymax - wall, s, i, 500 + attempt),
                    0.0};
        bool ok = true;
        for (const auto& q : state.poses) {
          ok = ok && std::hypot(p.x1 - q.x1, p.x2 - q.x2) >= params.ds + 0.05;
        }
        if (ok) {
          state.poses.push_back(p);
          break;
        }
      }
    }
    Eigen::VectorXd u(2 * n);
    for (int k = 0; k < 2 * n; ++k) {
      u[k] = rng::uniform_in(7, -params.alpha_bound, params.alpha_bound, s, 1000 + k);
    }
    const auto fr = barrier::filter_centralized(state, u, params, ws);
    if (fr.feasible && (fr.u - u).norm() <= 1e-9) ++exact;
  }
  report(2, "minimal invasiveness: separated states pass through untouched",
         exact == kStates,
         std::to_string(exact) + "/" + std::to_string(kStates) + " exact");
}

qp::QpProblem random_feasible_instance(std::uint64_t seed, int trial) {
  const int n_robots = 1 + static_cast<int>(rng::mix(seed, trial, 0) % 4);
  const int dim = 2 * n_robots;
  Eigen::VectorXd anchor(dim), desired(dim);
  for (int k = 0; k < dim; ++k) {
    anchor[k] = rng::uniform_in(seed, -0.08, 0.08, trial, 10 + k);
    desired[k] = rng::uniform_in(seed, -0.3, 0.3, trial, 50 + k);
  }
  qp::QpProblem p;
  p.dim = dim;
  p.desired = desired;
  p.box = 0.1;
  const int m = static_cast<int>(rng::mix(seed, trial, 1) % 5);
  for (int r = 0; r < m; ++r) {
    Eigen::VectorXd a(dim);
    for (int k = 0; k < dim; ++k) {
      a[k] = rng::uniform_in(seed, -1.0, 1.0, trial, 100 + 10 * r + k);
    }
    const double slack = rng::uniform_in(seed, 0.0, 0.05, trial, 200 + r);
    p.rows.push_back(qp::LinearRow::dense(a, a.dot(anchor) + slack));
  }
  return p;
}

void criterion_3() {
  const double t0 = now_ms();
  int agree = 0;
  const int kTrials = 1000;
  for (int trial = 0; trial < kTrials; ++trial) {
    const auto p = random_feasible_instance(99, trial);
    const auto sol = qp::solve(p);
    const auto ref = qp::solve_oracle(p);
    if (sol.status == qp::SolveStatus::optimal &&
        ref.status == qp::SolveStatus::optimal &&
        (sol.u_star - ref.u_star).norm() <= 1e-6) {
      ++agree;
    }
  }
  const double elapsed_s = (now_ms() - t0) / 1000.0;
  char buf[80];
  std::snprintf(buf, sizeof(buf), "%d/%d agree, %.1f s", agree, kTrials, elapsed_s);
  report(3, "QP solver matches the active-set enumeration oracle",
         agree == kTrials && elapsed_s < 30.0, buf);
}

void criterion_4() {
  barrier::BarrierParams params;
  int sound = 0;
  const int kTrials = 1000;
  for (int trial = 0; trial < kTrials; ++trial) {
    barrier::Workspace ws;
    const int n = 2 + static_cast<int>(rng::mix(13, trial, 0) % 9);
    const SwarmState state = barrier::random_dense_state(n, params, ws, 1000 + trial);
    Eigen::VectorXd u(2 * n);
    for (int k = 0; k < 2 * n; ++k) {
      u[k] = rng::uniform_in(13, -params.alpha_bound, params.alpha_bound, trial, k);
    }
    const auto fr = barrier::filter_decentralized(state, u, params, ws);
    if (!fr.feasible) continue;
    const auto set = barrier::build_constraints(state, params, ws);
    bool ok = true;
    for (const auto& row : set.rows) {
      ok = ok && row.row.dot(fr.u) <= row.row.b + 1e-9;
    }
    if (ok) ++sound;
  }

  ScenarioConfig c = swap_circle(10, FilterMode::decentralized);
  const auto log = simulator::run(c);
  const double dmin = min_distance(log);
  char buf[120];
  std::snprintf(buf, sizeof(buf), "%d/%d states sound, swap min dist %.4f m",
                sound, kTrials, dmin);
  report(4, "decentralized outputs satisfy the centralized certificate",
         sound == kTrials && !log.aborted && dmin >= 0.079, buf);
}

void criterion_5() {
  // (a) collision-free scenario: S stays exactly 1 and the report reproduces.
  ScenarioConfig a;
  a.poses = {{-0.4, -0.25, 0}, {0.4, 0.25, 0}};
  a.robot_count = 2;
  a.duration = 5.0;
  a.controller.goals = {{-0.4, 0.25}, {0.4, -0.25}};
  a.thresholds = {1e-4, 1e-4, 10};
  NoiseModel noise{0.002, 0.002, 0.001, 2024};
  const auto ra = verification::verify(a, a.thresholds, noise);
  bool all_one = ra.pass && ra.verdict == "pass-unfiltered";
  for (const auto& run : ra.per_run) all_one = all_one && run.score_total == 1.0;
  const bool reproducible =
      verification::to_json(ra) ==
      verification::to_json(verification::verify(a, a.thresholds, noise));

  // (b) unfiltered head-on crash: one full-stop contact costs 3e-4 J, which
  // exceeds d_max_individual = 1e-4 J, so both mean s_i go negative.
  ScenarioConfig b;
  b.poses = {{-0.2, 0, 0}, {0.2, 0, M_PI}};
  b.robot_count = 2;
  b.duration = 8.0;
  b.controller.kind = controllers::ControllerKind::position_swap;
  b.controller.goals = {{-0.2, 0}, {0.2, 0}};
  b.controller.kp = 10.0;
  b.thresholds = {2e-4, 1e-4, 5};
  const auto rb = verification::verify(b, b.thresholds, {0, 0, 0, 3});
  const bool crash_fails = !rb.pass && rb.verdict == "fail-requires-barriers" &&
                           rb.mean_score_per_robot.size() == 2 &&
                           rb.mean_score_per_robot[0] < 0.0 &&
                           rb.mean_score_per_robot[1] < 0.0;

  char buf[120];
  std::snprintf(buf, sizeof(buf), "clean mean S %.3f, crash mean s_i %.1f/%.1f",
                ra.mean_score, rb.mean_score_per_robot[0], rb.mean_score_per_robot[1]);
  report(5, "safety gate: clean scenario passes, head-on crash fails",
         all_one && reproducible && crash_fails, buf);
}

void criterion_6() {
  // Closed-loop wall impact at the saturated speed 0.1 m/s.
  ScenarioConfig c;
  c.poses = {{0.55, 0, 0}};
  c.robot_count = 1;
  c.duration = 3.0;
  c.controller.goals = {{0.65, 0}};
  c.controller.kp = 10.0;  // keeps the command saturated up to the wall
  c.thresholds = {1e-3, 1e-3, 1};
  const auto log = simulator::run(c);
  double first_loss = -1.0;
  for (const auto& tick : log.ticks) {
    if (tick.robots[0].collide) {
      first_loss = tick.robots[0].e_loss;
      break;
    }
  }
  char buf[80];
  std::snprintf(buf, sizeof(buf), "per-event damage %.6e J", first_loss);
  report(6, "damage formula: 0.1 m/s wall impact costs 3.0e-4 J",
         std::abs(first_loss - 3.0e-4) <= 1e-8, buf);
}

void criterion_7() {
  const double t0 = now_ms();
  const ModelCoefficients truth{0.8645, 0.8119, 0.4640};
  const int d = 30000;
  sysid::RegressionDataset data;
  data.model_rates.resize(d, 3);
  data.observed_rates.resize(d, 3);
  for (int k = 0; k < d; ++k) {
    const RobotPose pose{0, 0, rng::uniform_in(55, -M_PI, M_PI, k, 0)};
    const UnicycleCommand cmd{rng::uniform_in(55, -0.1, 0.1, k, 1),
                              rng::uniform_in(55, -4.0, 4.0, k, 2)};
    const PoseRate nominal = unicycle_derivative(pose, cmd, nominal_coefficients());
    const PoseRate actual = unicycle_derivative(pose, cmd, truth);
    data.model_rates.row(k) << nominal.dx1, nominal.dx2, nominal.dx3;
    data.observed_rates.row(k) << actual.dx1 + 0.01 * rng::normal(55, k, 3),
        actual.dx2 + 0.01 * rng::normal(55, k, 4),
        actual.dx3 + 0.01 * rng::normal(55, k, 5);
  }
  const auto fit = sysid::fit_coefficients(data);
  const double elapsed_s = (now_ms() - t0) / 1000.0;
  const bool ok = std::abs(fit.a1 - truth.a1) <= 0.01 * truth.a1 &&
                  std::abs(fit.a2 - truth.a2) <= 0.01 * truth.a2 &&
                  std::abs(fit.a3 - truth.a3) <= 0.01 * truth.a3 &&
                  elapsed_s < 5.0;
  char buf[120];
  std::snprintf(buf, sizeof(buf), "fit (%.4f, %.4f, %.4f), %.2f s", fit.a1,
                fit.a2, fit.a3, elapsed_s);
  report(7, "regression recovers the plant coefficients within 1%", ok, buf);
}

void criterion_8() {
  std::vector<Eigen::Vector2d> path, offset;
  for (int k = 0; k <= 200; ++k) {
    const double t = 0.01 * k;
    path.push_back({t, 0.05 * std::sin(3.0 * t)});
    offset.push_back({t, 0.05 * std::sin(3.0 * t) + 0.01});
  }
  const double self = sysid::trajectory_error(path, path);
  const double e = sysid::trajectory_error(path, offset);
  char buf[80];
  std::snprintf(buf, sizeof(buf), "self %.3e m, offset %.5f m", self, e);
  report(8, "trajectory error: zero on self, 0.01 m on a parallel offset",
         self == 0.0 && std::abs(e - 0.01) <= 0.0002, buf);
}

void criterion_9_and_10() {
  using barrier::CertificateMode;
  // Best of three repetitions per entry: wall-clock means at the tens-of-
  // microsecond scale are easily doubled by scheduler contention, and the
  // fastest observation is the least contaminated estimate of the cost.
  double cen10 = 0, cen20 = 0, cen100 = 0, dec10 = 0, dec100 = 0;
  for (int rep = 0; rep < 3; ++rep) {
    const auto table = barrier::benchmark_certificates(
        {10, 20, 100},
        {CertificateMode::centralized, CertificateMode::decentralized}, 30, 7);
    const auto keep = [rep](double& slot, double value) {
      if (rep == 0 || value < slot) slot = value;
    };
    for (const auto& row : table) {
      if (row.mode == CertificateMode::centralized) {
        if (row.n == 10) keep(cen10, row.ms_mean);
        if (row.n == 20) keep(cen20, row.ms_mean);
        if (row.n == 100) keep(cen100, row.ms_mean);
      } else {
        if (row.n == 10) keep(dec10, row.ms_mean);
        if (row.n == 100) keep(dec100, row.ms_mean);
      }
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "centralized %.3f -> %.3f ms (%.1fx), per-agent %.4f -> %.4f ms (%.1fx)",
                cen10, cen100, cen100 / cen10, dec10, dec100, dec100 / dec10);
  report(9, "scaling: centralized grows >= 5x from N=10 to N=100, per-agent <= 2x",
         cen100 >= 5.0 * cen10 && dec100 <= 2.0 * dec10, buf);

  std::snprintf(buf, sizeof(buf), "N=20 centralized %.3f ms/iter", cen20);
  report(10, "real-time bound: N=20 centralized iteration within 33 ms",
         cen20 > 0.0 && cen20 <= 33.0, buf);
}

void criterion_11() {
  barrier::BarrierParams params;  // ds = 0.08, radius 0.20
  int worst = 0;
  for (int trial = 0; trial < 200; ++trial) {
    // Maximally dense random packing: jittered grid at just over ds.
    SwarmState state;
    const int side = 7;
    for (int gy = 0; gy < side; ++gy) {
      for (int gx = 0; gx < side; ++gx) {
        state.poses.push_back(
            {gx * 0.081 + 0.0004 * rng::uniform(71, trial, gy * side + gx, 0),
             gy * 0.081 + 0.0004 * rng::uniform(71, trial, gy * side + gx, 1),
             0.0});
      }
    }
    barrier::Workspace ws{-1.0, 2.0, -1.0, 2.0};
    const auto set = barrier::build_constraints(state, params, ws);
    std::vector<int> per_agent(state.size(), 0);
    for (const auto& row : set.rows) {
      if (row.kind == barrier::RowKind::pairwise) {
        ++per_agent[row.i];
        ++per_agent[row.j];
      }
    }
    for (int count : per_agent) worst = std::max(worst, count);
  }
  report(11, "neighborhood cap: at most 26 pairwise rows per agent",
         worst >= 1 && worst <= 26, "worst " + std::to_string(worst));
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9_and_10();
  criterion_11();
  if (g_failures > 0) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all 11 criteria passed\n");
  return 0;
}
