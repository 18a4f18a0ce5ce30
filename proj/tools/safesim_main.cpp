#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "safesim/barrier.hpp"
#include "safesim/scenario.hpp"
#include "safesim/simulator.hpp"
#include "safesim/sysid.hpp"
#include "safesim/verification.hpp"
#include "safesim/version.hpp"

namespace {

// Exit-code contract: 0 success/pass, 1 gate-fail, 2 usage/validation,
// 3 internal error.
constexpr int kExitOk = 0;
constexpr int kExitGateFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitInternal = 3;

using safesim::ScenarioConfig;
using safesim::ValidationIssue;

void print_issues(const std::vector<ValidationIssue>& issues) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& issue : issues) {
    j.push_back({{"field", issue.field}, {"message", issue.message}});
  }
  std::cerr << nlohmann::json{{"error", "invalid scenario"}, {"violations", j}}.dump()
            << "\n";
}

std::optional<ScenarioConfig> load_and_validate(const std::string& path,
                                                std::optional<std::uint64_t> seed) {
  std::vector<ValidationIssue> issues;
  ScenarioConfig config = safesim::load_scenario_file(path, issues);
  if (issues.empty()) {
    if (seed) config.noise.seed = *seed;
    safesim::resolve_initial_poses(config);
    if (config.virtual_count > 0) {
      const int count = config.virtual_count;
      config.virtual_count = 0;
      config = safesim::simulator::add_virtual_robots(config, count);
    }
    auto more = safesim::validate(config);
    issues.insert(issues.end(), more.begin(), more.end());
  }
  if (!issues.empty()) {
    print_issues(issues);
    return std::nullopt;
  }
  return config;
}

safesim::simulator::OutputHeader make_header(const std::string& config_path,
                                             std::uint64_t seed) {
  return {safesim::file_hash(config_path), seed, safesim::kVersion};
}

int cmd_simulate(const std::string& config_path, std::optional<std::uint64_t> seed,
                 std::string csv_out, std::string jsonl_out) {
  auto config = load_and_validate(config_path, seed);
  if (!config) return kExitUsage;
  const auto log = safesim::simulator::run(*config);
  if (log.aborted) {
    std::cerr << "run aborted: " << log.error << "\n";
  }

  const auto header = make_header(config_path, config->noise.seed);
  if (csv_out.empty()) csv_out = config->output_csv;
  if (jsonl_out.empty()) jsonl_out = config->output_jsonl;
  if (!csv_out.empty()) {
    std::ofstream out(csv_out);
    safesim::simulator::write_csv(log, out, header);
  }
  if (!jsonl_out.empty()) {
    std::ofstream out(jsonl_out);
    safesim::simulator::write_jsonl(log, out, header);
  }

  const auto summary = safesim::simulator::summarize(log);
  nlohmann::json j{{"ticks", log.ticks.size()},
                   {"robots", log.n},
                   {"min_pairwise_distance", summary.min_pairwise_distance},
                   {"contact_ticks", summary.contact_ticks},
                   {"total_damage_J", summary.total_damage},
                   {"seed", config->noise.seed},
                   {"config_hash", header.config_hash},
                   {"version", safesim::kVersion}};
  if (log.aborted) j["error"] = log.error;
  std::cout << j.dump(2) << "\n";
  return log.aborted ? kExitInternal : kExitOk;
}

int cmd_verify(const std::string& config_path, std::optional<std::uint64_t> seed,
               std::string report_out) {
  auto config = load_and_validate(config_path, seed);
  if (!config) return kExitUsage;
  const auto report =
      safesim::verification::verify(*config, config->thresholds, config->noise);
  if (report_out.empty()) report_out = config->output_report;
  if (!report_out.empty()) {
    std::ofstream out(report_out);
    out << safesim::verification::to_json(report) << "\n";
  }
  std::cout << safesim::verification::to_text(report);
  return report.pass ? kExitOk : kExitGateFail;
}

int cmd_benchmark(const std::vector<int>& n_list, const std::string& modes,
                  int iters, std::uint64_t seed, const std::string& csv_out) {
  using safesim::barrier::CertificateMode;
  std::vector<CertificateMode> mode_list;
  if (modes == "centralized" || modes == "both") {
    mode_list.push_back(CertificateMode::centralized);
  }
  if (modes == "decentralized" || modes == "both") {
    mode_list.push_back(CertificateMode::decentralized);
  }
  if (mode_list.empty()) {
    std::cerr << "unknown --modes value: " << modes << "\n";
    return kExitUsage;
  }
  const auto table =
      safesim::barrier::benchmark_certificates(n_list, mode_list, iters, seed);

  std::ostringstream csv;
  csv << "n,mode,ms_mean,ms_p95\n";
  std::cout << "  N  mode           ms/iter mean   ms/iter p95\n";
  for (const auto& row : table) {
    csv << row.n << ',' << to_string(row.mode) << ',' << row.ms_mean << ','
        << row.ms_p95 << "\n";
    std::printf("%3d  %-13s  %12.4f  %12.4f\n", row.n, to_string(row.mode),
                row.ms_mean, row.ms_p95);
  }
  if (!csv_out.empty()) {
    std::ofstream out(csv_out);
    out << csv.str();
  }
  return kExitOk;
}

int cmd_sysid(const std::vector<std::string>& log_paths, double lookahead,
              const std::string& json_out) {
  Eigen::Index total = 0;
  std::vector<safesim::simulator::TrajectoryLog> logs;
  for (const auto& path : log_paths) {
    std::ifstream in(path);
    if (!in) {
      std::cerr << "cannot open log: " << path << "\n";
      return kExitUsage;
    }
    logs.push_back(safesim::simulator::read_csv(in));
    const auto& log = logs.back();
    for (int i = 0; i < log.n; ++i) {
      total += std::max<Eigen::Index>(0, static_cast<Eigen::Index>(log.ticks.size()) - 1);
    }
  }

  // Model rates are nominal unicycle evaluations of the executed commands;
  // observations are Euler differences of the logged poses.
  safesim::sysid::RegressionDataset data;
  data.model_rates.resize(total, 3);
  data.observed_rates.resize(total, 3);
  Eigen::Index row = 0;
  for (const auto& log : logs) {
    if (log.ticks.size() < 2) continue;
    const double dt = log.ticks[1].t - log.ticks[0].t;
    for (int i = 0; i < log.n; ++i) {
      std::vector<safesim::RobotPose> poses;
      for (const auto& tick : log.ticks) poses.push_back(tick.robots[i].pose);
      const Eigen::MatrixX3d observed = safesim::sysid::rate_observations(poses, dt);
      for (Eigen::Index k = 0; k < observed.rows(); ++k) {
        const auto& rec = log.ticks[k].robots[i];
        const auto uc = safesim::si_to_uni(rec.u_star, rec.pose, lookahead);
        const auto rate = safesim::unicycle_derivative(rec.pose, uc,
                                                       safesim::nominal_coefficients());
        data.model_rates.row(row) << rate.dx1, rate.dx2, rate.dx3;
        data.observed_rates.row(row) = observed.row(k);
        ++row;
      }
    }
  }
  data.model_rates.conservativeResize(row, 3);
  data.observed_rates.conservativeResize(row, 3);

  safesim::ModelCoefficients coeffs;
  try {
    coeffs = safesim::sysid::fit_coefficients(data);
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  }
  Eigen::RowVector3d residual =
      (data.observed_rates -
       (data.model_rates.array().rowwise() *
        Eigen::Array3d(coeffs.a1, coeffs.a2, coeffs.a3).transpose())
           .matrix())
          .colwise()
          .norm();
  nlohmann::json j{{"alpha1", coeffs.a1}, {"alpha2", coeffs.a2},
                   {"alpha3", coeffs.a3}, {"d", row},
                   {"residuals", {residual[0], residual[1], residual[2]}}};
  std::cout << j.dump(2) << "\n";
  if (!json_out.empty()) {
    std::ofstream out(json_out);
    out << j.dump(2) << "\n";
  }
  return kExitOk;
}

int cmd_traj_error(const std::string& sim_path, const std::string& real_path,
                   int robot_id) {
  std::ifstream sim_in(sim_path), real_in(real_path);
  if (!sim_in || !real_in) {
    std::cerr << "cannot open log file\n";
    return kExitUsage;
  }
  const auto sim_log = safesim::simulator::read_csv(sim_in);
  const auto real_log = safesim::simulator::read_csv(real_in);
  if (robot_id >= sim_log.n || robot_id >= real_log.n) {
    std::cerr << "robot id " << robot_id << " not present in both logs\n";
    return kExitUsage;
  }
  auto positions = [&](const safesim::simulator::TrajectoryLog& log) {
    std::vector<Eigen::Vector2d> p;
    for (const auto& tick : log.ticks) {
      p.push_back({tick.robots[robot_id].pose.x1, tick.robots[robot_id].pose.x2});
    }
    return p;
  };
  const double e = safesim::sysid::trajectory_error(positions(sim_log),
                                                    positions(real_log));
  std::printf("%.4f m\n", e);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"desk-scale multi-robot safety stack: simulate, verify, benchmark"};
  app.require_subcommand(1);

  std::string config_path, csv_out, jsonl_out, report_out;
  std::optional<std::uint64_t> seed;

  auto* simulate = app.add_subcommand("simulate", "run a scenario and write logs");
  simulate->add_option("config", config_path, "scenario YAML file")->required();
  simulate->add_option("--seed", seed, "override the scenario seed");
  simulate->add_option("--csv", csv_out, "trajectory CSV output path");
  simulate->add_option("--jsonl", jsonl_out, "trajectory JSONL output path");

  auto* verify = app.add_subcommand("verify", "Monte Carlo safety gate");
  verify->add_option("config", config_path, "scenario YAML file")->required();
  verify->add_option("--seed", seed, "override the master seed");
  verify->add_option("--report", report_out, "safety report JSON output path");

  std::vector<int> n_list{10, 40, 100};
  std::string modes = "both";
  int iters = 30;
  std::uint64_t bench_seed = 1;
  auto* benchmark = app.add_subcommand("benchmark", "certificate timing table");
  benchmark->add_option("--n", n_list, "swarm sizes")->delimiter(',');
  benchmark->add_option("--modes", modes, "centralized|decentralized|both");
  benchmark->add_option("--iters", iters, "iterations per configuration");
  benchmark->add_option("--seed", bench_seed, "state-generation seed");
  benchmark->add_option("--csv", csv_out, "benchmark CSV output path");

  std::vector<std::string> log_paths;
  double lookahead = safesim::kDefaultLookahead;
  std::string json_out;
  auto* sysid = app.add_subcommand("sysid", "fit model coefficients from logs");
  sysid->add_option("logs", log_paths, "trajectory CSV files")->required();
  sysid->add_option("--lookahead", lookahead, "inversion offset used by the run");
  sysid->add_option("--json", json_out, "coefficients JSON output path");

  std::string sim_path, real_path;
  int robot_id = 0;
  auto* traj = app.add_subcommand("traj-error", "trajectory error between two logs");
  traj->add_option("sim", sim_path, "simulated trajectory CSV")->required();
  traj->add_option("real", real_path, "reference trajectory CSV")->required();
  traj->add_option("--robot", robot_id, "robot id to compare");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(config_path, seed, csv_out, jsonl_out);
    if (verify->parsed()) return cmd_verify(config_path, seed, report_out);
    if (benchmark->parsed()) {
      return cmd_benchmark(n_list, modes, iters, bench_seed, csv_out);
    }
    if (sysid->parsed()) return cmd_sysid(log_paths, lookahead, json_out);
    if (traj->parsed()) return cmd_traj_error(sim_path, real_path, robot_id);
  } catch (const std::runtime_error& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;  // schema/file errors
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}
