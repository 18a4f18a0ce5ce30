#include "safesim/simulator.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>

#include "safesim/rng.hpp"

namespace safesim::simulator {

namespace {

// Noise channel ids for the counter-based stream.
enum Channel : std::uint64_t {
  kInitX = 0,
  kInitY = 1,
  kObsX = 2,
  kObsY = 3,
  kDynX = 4,
  kDynY = 5,
  kDynTheta = 6,
};

// Closed-loop filtering tolerates sub-millimeter Euler dips below ds.
constexpr double kRunSlack = 2e-3;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

ContactResult resolve_contacts(SwarmState& state,
                               std::vector<Eigen::Vector2d>& velocities,
                               const CollisionModel& collision,
                               const barrier::Workspace& ws) {
  const int n = static_cast<int>(state.size());
  ContactResult result;
  result.indicators.assign(n, false);
  result.v_before.resize(n);
  result.v_after.resize(n);
  result.e_loss.assign(n, 0.0);
  for (int i = 0; i < n; ++i) result.v_before[i] = velocities[i].norm();

  const double r = collision.robot_radius;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      Eigen::Vector2d d(state.poses[i].x1 - state.poses[j].x1,
                        state.poses[i].x2 - state.poses[j].x2);
      const double dist = d.norm();
      if (dist >= 2.0 * r) continue;
      const Eigen::Vector2d normal = dist > 1e-12 ? (d / dist).eval()
                                                  : Eigen::Vector2d(1.0, 0.0);
      result.indicators[i] = true;
      result.indicators[j] = true;
      const double push = 0.5 * (2.0 * r - dist);
      state.poses[i].x1 += push * normal.x();
      state.poses[i].x2 += push * normal.y();
      state.poses[j].x1 -= push * normal.x();
      state.poses[j].x2 -= push * normal.y();
      const double vi_n = velocities[i].dot(normal);
      if (vi_n < 0.0) velocities[i] -= vi_n * normal;
      const double vj_n = velocities[j].dot(normal);
      if (vj_n > 0.0) velocities[j] -= vj_n * normal;
    }
  }
  for (int i = 0; i < n; ++i) {
    auto& p = state.poses[i];
    auto& v = velocities[i];
    if (p.x1 < ws.xmin + r) {
      p.x1 = ws.xmin + r;
      result.indicators[i] = true;
      if (v.x() < 0.0) v.x() = 0.0;
    }
    if (p.x1 > ws.xmax - r) {
      p.x1 = ws.xmax - r;
      result.indicators[i] = true;
      if (v.x() > 0.0) v.x() = 0.0;
    }
    if (p.x2 < ws.ymin + r) {
      p.x2 = ws.ymin + r;
      result.indicators[i] = true;
      if (v.y() < 0.0) v.y() = 0.0;
    }
    if (p.x2 > ws.ymax - r) {
      p.x2 = ws.ymax - r;
      result.indicators[i] = true;
      if (v.y() > 0.0) v.y() = 0.0;
    }
  }
  for (int i = 0; i < n; ++i) {
    result.v_after[i] = velocities[i].norm();
    const double loss = 0.5 * collision.mass *
                        (result.v_before[i] * result.v_before[i] -
                         result.v_after[i] * result.v_after[i]);
    result.e_loss[i] = std::max(0.0, loss);
  }
  return result;
}

TrajectoryLog run(const ScenarioConfig& scenario) {
  const int n = static_cast<int>(scenario.poses.size());
  const std::uint64_t seed = scenario.noise.seed;
  TrajectoryLog log;
  log.n = n;

  SwarmState state;
  state.poses = scenario.poses;
  state.time = 0.0;
  for (int i = 0; i < n; ++i) {
    state.poses[i].x1 += scenario.noise.sigma_init * rng::normal(seed, i, 0, kInitX);
    state.poses[i].x2 += scenario.noise.sigma_init * rng::normal(seed, i, 0, kInitY);
  }

  const int ticks = static_cast<int>(std::ceil(scenario.duration / scenario.dt - 1e-9));
  controllers::ControllerState cstate;
  for (int k = 0; k < ticks; ++k) {
    const double t = k * scenario.dt;

    SwarmState observed = state;
    for (int i = 0; i < n; ++i) {
      observed.poses[i].x1 += scenario.noise.sigma_obs * rng::normal(seed, i, k, kObsX);
      observed.poses[i].x2 += scenario.noise.sigma_obs * rng::normal(seed, i, k, kObsY);
    }

    Eigen::VectorXd u_hat;
    try {
      u_hat = controllers::compute(scenario.controller, observed, cstate);
    } catch (const std::exception& e) {
      log.aborted = true;
      log.error = std::string("controller error at t=") + format_double(t) + ": " +
                  e.what();
      return log;
    }

    Eigen::VectorXd u_star = u_hat;
    if (scenario.filter_mode != FilterMode::off) {
      try {
        // The filter acts on the true state; observation noise only perturbs
        // what the controller sees.
        const barrier::FilterResult fr =
            scenario.filter_mode == FilterMode::centralized
                ? barrier::filter_centralized(state, u_hat, scenario.barrier_params,
                                              scenario.workspace, kRunSlack)
                : barrier::filter_decentralized(state, u_hat, scenario.barrier_params,
                                                scenario.workspace, kRunSlack);
        u_star = fr.u;
      } catch (const barrier::UnsafeStartError& e) {
        log.aborted = true;
        log.error = std::string("filter error at t=") + format_double(t) + ": " +
                    e.what();
        return log;
      }
    }

    SwarmState next = state;
    std::vector<Eigen::Vector2d> velocities(n);
    for (int i = 0; i < n; ++i) {
      const SiCommand si{u_star[2 * i], u_star[2 * i + 1]};
      const UnicycleCommand uc = si_to_uni(si, state.poses[i], scenario.lookahead,
                                           scenario.v_max, scenario.w_max);
      PoseRate rate = unicycle_derivative(state.poses[i], uc, scenario.coefficients);
      if (scenario.noise.sigma_dynamics > 0.0) {
        rate.dx1 += scenario.noise.sigma_dynamics * rng::normal(seed, i, k, kDynX);
        rate.dx2 += scenario.noise.sigma_dynamics * rng::normal(seed, i, k, kDynY);
        rate.dx3 += scenario.noise.sigma_dynamics * rng::normal(seed, i, k, kDynTheta);
      }
      next.poses[i].x1 = state.poses[i].x1 + scenario.dt * rate.dx1;
      next.poses[i].x2 = state.poses[i].x2 + scenario.dt * rate.dx2;
      next.poses[i].x3 = wrap_angle(state.poses[i].x3 + scenario.dt * rate.dx3);
      velocities[i] = {rate.dx1, rate.dx2};
    }
    next.time = state.time + scenario.dt;

    const ContactResult contacts =
        resolve_contacts(next, velocities, scenario.collision, scenario.workspace);

    TickRecord record;
    record.t = t;
    record.robots.resize(n);
    for (int i = 0; i < n; ++i) {
      auto& rr = record.robots[i];
      rr.pose = state.poses[i];
      rr.u_hat = {u_hat[2 * i], u_hat[2 * i + 1]};
      rr.u_star = {u_star[2 * i], u_star[2 * i + 1]};
      rr.collide = contacts.indicators[i];
      rr.v_before = contacts.v_before[i];
      rr.v_after = contacts.v_after[i];
      rr.e_loss = contacts.e_loss[i];
    }
    log.ticks.push_back(std::move(record));
    state = std::move(next);
  }
  return log;
}

ScenarioConfig add_virtual_robots(const ScenarioConfig& scenario, int count) {
  if (count < 0) throw std::invalid_argument("add_virtual_robots: count must be >= 0");
  ScenarioConfig out = scenario;
  const std::uint64_t seed = rng::derive_seed(scenario.placement_seed ^ 0x76697274ULL,
                                              scenario.poses.size());
  const double margin =
      scenario.barrier_params.boundary_margin + scenario.collision.robot_radius;
  for (int v = 0; v < count; ++v) {
    RobotPose p;
    bool placed = false;
    for (std::uint64_t attempt = 0; attempt < 10000 && !placed; ++attempt) {
      p.x1 = rng::uniform_in(seed, scenario.workspace.xmin + margin,
                             scenario.workspace.xmax - margin, v, attempt, 0);
      p.x2 = rng::uniform_in(seed, scenario.workspace.ymin + margin,
                             scenario.workspace.ymax - margin, v, attempt, 1);
      p.x3 = wrap_angle(2.0 * M_PI * rng::uniform(seed, v, attempt, 2));
      placed = true;
      for (const auto& q : out.poses) {
        if (std::hypot(p.x1 - q.x1, p.x2 - q.x2) <
            scenario.barrier_params.ds + 0.01) {
          placed = false;
          break;
        }
      }
    }
    if (!placed) {
      throw std::runtime_error("add_virtual_robots: no collision-free placement found");
    }
    out.poses.push_back(p);
  }
  out.robot_count = static_cast<int>(out.poses.size());
  out.virtual_count = scenario.virtual_count + count;
  return out;
}

RunSummary summarize(const TrajectoryLog& log) {
  RunSummary s;
  s.min_pairwise_distance = std::numeric_limits<double>::infinity();
  for (const auto& tick : log.ticks) {
    bool any = false;
    for (std::size_t i = 0; i < tick.robots.size(); ++i) {
      any = any || tick.robots[i].collide;
      s.total_damage += tick.robots[i].collide ? tick.robots[i].e_loss : 0.0;
      for (std::size_t j = i + 1; j < tick.robots.size(); ++j) {
        const double d = std::hypot(tick.robots[i].pose.x1 - tick.robots[j].pose.x1,
                                    tick.robots[i].pose.x2 - tick.robots[j].pose.x2);
        s.min_pairwise_distance = std::min(s.min_pairwise_distance, d);
      }
    }
    if (any) ++s.contact_ticks;
  }
  if (log.n < 2) s.min_pairwise_distance = std::numeric_limits<double>::infinity();
  return s;
}

static const char* kCsvColumns =
    "t,id,x1,x2,x3,ux_hat,uy_hat,ux_star,uy_star,collide,e_loss";

void write_csv(const TrajectoryLog& log, std::ostream& out, const OutputHeader& hdr) {
  out << "# safesim " << hdr.version << "\n";
  out << "# config_hash " << hdr.config_hash << "\n";
  out << "# seed " << hdr.seed << "\n";
  out << kCsvColumns << "\n";
  for (const auto& tick : log.ticks) {
    for (std::size_t i = 0; i < tick.robots.size(); ++i) {
      const auto& r = tick.robots[i];
      out << format_double(tick.t) << ',' << i << ',' << format_double(r.pose.x1)
          << ',' << format_double(r.pose.x2) << ',' << format_double(r.pose.x3)
          << ',' << format_double(r.u_hat.ux) << ',' << format_double(r.u_hat.uy)
          << ',' << format_double(r.u_star.ux) << ',' << format_double(r.u_star.uy)
          << ',' << (r.collide ? 1 : 0) << ',' << format_double(r.e_loss) << "\n";
    }
  }
}

void write_jsonl(const TrajectoryLog& log, std::ostream& out, const OutputHeader& hdr) {
  nlohmann::json header{{"version", hdr.version},
                        {"config_hash", hdr.config_hash},
                        {"seed", hdr.seed}};
  out << header.dump() << "\n";
  for (const auto& tick : log.ticks) {
    for (std::size_t i = 0; i < tick.robots.size(); ++i) {
      const auto& r = tick.robots[i];
      nlohmann::json row{{"t", tick.t},       {"id", i},
                         {"x1", r.pose.x1},   {"x2", r.pose.x2},
                         {"x3", r.pose.x3},   {"ux_hat", r.u_hat.ux},
                         {"uy_hat", r.u_hat.uy}, {"ux_star", r.u_star.ux},
                         {"uy_star", r.u_star.uy}, {"collide", r.collide ? 1 : 0},
                         {"e_loss", r.e_loss}};
      out << row.dump() << "\n";
    }
  }
}

TrajectoryLog read_csv(std::istream& in) {
  TrajectoryLog log;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != kCsvColumns) {
        // Name the first mismatching column.
        std::istringstream got(line), want(kCsvColumns);
        std::string g, w;
        int col = 0;
        while (std::getline(want, w, ',')) {
          ++col;
          if (!std::getline(got, g, ',') || g != w) {
            throw std::runtime_error("trajectory CSV schema mismatch at column " +
                                     std::to_string(col) + ": expected '" + w +
                                     "', got '" + (g.empty() ? "<missing>" : g) + "'");
          }
        }
        if (std::getline(got, g, ',')) {
          throw std::runtime_error("trajectory CSV schema mismatch: extra column '" +
                                   g + "'");
        }
      }
      header_seen = true;
      continue;
    }
    std::istringstream row(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (cells.size() != 11) {
      throw std::runtime_error("trajectory CSV row has " +
                               std::to_string(cells.size()) + " columns, expected 11");
    }
    const double t = std::stod(cells[0]);
    const int id = std::stoi(cells[1]);
    if (log.ticks.empty() || id == 0) {
      log.ticks.push_back({t, {}});
    }
    TickRobotRecord r;
    r.pose = {std::stod(cells[2]), std::stod(cells[3]), std::stod(cells[4])};
    r.u_hat = {std::stod(cells[5]), std::stod(cells[6])};
    r.u_star = {std::stod(cells[7]), std::stod(cells[8])};
    r.collide = std::stoi(cells[9]) != 0;
    r.e_loss = std::stod(cells[10]);
    log.ticks.back().robots.push_back(r);
    log.n = std::max(log.n, id + 1);
  }
  if (!header_seen) throw std::runtime_error("trajectory CSV: missing header row");
  return log;
}

}  // namespace safesim::simulator
