// Command-line harness: simulate, calibrate, train, evaluate, oracle, export, sweep.
//
// Exit codes:
//   0  success
//   1  unexpected internal error
//   2  bad configuration or usage
//   3  non-finite training loss
//   4  calibration target infeasible
//   5  problem too large for the exact planner

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "evtol/battery.hpp"
#include "evtol/csv.hpp"
#include "evtol/dqn.hpp"
#include "evtol/errors.hpp"
#include "evtol/flight_profile.hpp"
#include "evtol/mission_env.hpp"
#include "evtol/oracle.hpp"
#include "evtol/run_config.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace evtol;

namespace {

enum Exit { kOk = 0, kInternal = 1, kUsage = 2, kLoss = 3, kCalibration = 4, kCapacity = 5 };

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string scenario;
};

config::RunConfig load_config(const Common& c) {
  if (c.config.empty()) throw ConfigError("--config is required for this command");
  auto cfg = config::load(c.config);
  if (c.seed) {
    cfg.seed = *c.seed;
    cfg.train.seed = *c.seed;
  }
  if (!c.out.empty()) cfg.output_dir = c.out;
  if (!c.scenario.empty()) cfg.scenario.scenario = mission::parse_scenario(c.scenario);
  return cfg;
}

fs::path prepare_out(const fs::path& dir) {
  fs::create_directories(dir);
  return dir;
}

void write_json(const json& j, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

json ci(const double c[2]) { return json::array({c[0], c[1]}); }

json report_json(const dqn::EvalReport& r) {
  return {{"episodes", r.episodes},
          {"mean_reward", r.mean_reward},
          {"reward_ci", ci(r.reward_ci)},
          {"mean_destinations", r.mean_destinations},
          {"destinations_ci", ci(r.destinations_ci)},
          {"violation_rate", r.violation_rate},
          {"violation_ci", ci(r.violation_ci)},
          {"mean_cycles", r.mean_cycles},
          {"cycles_ci", ci(r.cycles_ci)},
          {"completion_rate", r.completion_rate},
          {"truncation_rate", r.truncation_rate}};
}

void write_episodes_csv(const dqn::EvalReport& r, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  csv::write_row(out, {"seed", "reward", "destinations", "violation", "cycles", "completed", "truncated"});
  for (std::size_t i = 0; i < r.per_episode.size(); ++i) {
    const auto& e = r.per_episode[i];
    csv::write_row(out, {std::to_string(r.seeds[i]), csv::number(e.reward), std::to_string(e.destinations),
                         std::to_string(int(e.violation)), std::to_string(e.cycles),
                         std::to_string(int(e.completed)), std::to_string(int(e.truncated))});
  }
}

struct Setup {
  config::RunConfig cfg;
  mission::MissionMap map;
  mission::EnvConfig env;
  dqn::TaskFactory factory;
};

Setup setup(const Common& c) {
  Setup s;
  s.cfg = load_config(c);
  s.map = config::resolve_map(s.cfg);
  s.env = config::env_config(s.cfg, s.map);
  s.factory = dqn::mission_task_factory(s.map, s.cfg.scenario, s.env);
  return s;
}

dqn::TrainResult train_and_save(const Setup& s, const fs::path& dir, const std::string& tag) {
  auto result = dqn::train(s.factory, s.cfg.train);
  dqn::write_curve_csv(result.curve, dir / ("curve" + tag + ".csv"));
  dqn::save_checkpoint({result.net, s.map.size(), s.env.radius_nm}, dir / ("checkpoint" + tag + ".json"));
  return result;
}

int cmd_simulate(const Common& c, double distance, int wind, std::optional<double> kappa_flag, double q_max,
                 double r0, double dt) {
  double kappa = flight::calibrated_kappa();
  if (!c.config.empty()) kappa = config::resolve_kappa(load_config(c));
  if (kappa_flag) kappa = *kappa_flag;
  if (!(distance >= 0.0) || !std::isfinite(distance)) throw ConfigError("leg distance must be non-negative");
  if (!(kappa >= 0.0)) throw ConfigError("kappa must be non-negative");
  battery::BatteryParams p;
  p.q_max = q_max;
  p.r0 = r0;
  try {
    p.validate();
    flight::wind_index(wind);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("bad leg: ") + e.what());
  }
  const auto dir = prepare_out(c.out.empty() ? fs::path("out") : fs::path(c.out));
  json summary = json::array();
  for (int alt : flight::kAltitudes) {
    const auto leg = flight::make_leg({0.0, 0.0}, {distance, 0.0}, alt, wind);
    const auto profile = flight::build_leg_profile(leg, kappa);
    const auto traj = battery::simulate_discharge(p, profile, 1.0, {dt, true});
    const auto path = dir / ("simulate_" + std::to_string(alt) + ".csv");
    std::ofstream out(path, std::ios::binary);
    csv::write_row(out, {"t", "current", "voltage"});
    for (const auto& s : traj.samples) {
      csv::write_row(out, {csv::number(s.t), csv::number(s.current), csv::number(s.voltage)});
    }
    json row{{"altitude_m", alt}, {"file", path.filename().string()}, {"final_z", traj.final_z},
             {"eod", traj.eod_reached()}, {"energy_kj", flight::leg_energy(profile)}};
    json segs = json::array();
    for (const auto& seg : profile.segments) {
      segs.push_back({{"phase", std::string(phase_name(seg.phase))}, {"duration_s", seg.duration},
                      {"current_a", seg.current}});
    }
    row["segments"] = segs;
    summary.push_back(row);
  }
  write_json({{"kappa", kappa}, {"distance_nm", distance}, {"wind_kts", wind}, {"altitudes", summary}},
             dir / "simulate.json");
  std::cout << "wrote " << flight::kAltitudes.size() << " trajectories to " << dir.string() << "\n";
  return kOk;
}

int cmd_calibrate(const Common& c, std::optional<double> target_flag, const std::string& health, bool count_only) {
  double target = flight::kDefaultCalibrationTarget;
  if (!c.config.empty()) {
    const auto cfg = load_config(c);
    if (cfg.kappa.calibration_target) target = *cfg.kappa.calibration_target;
  }
  if (target_flag) target = *target_flag;
  if (!(target > 0.0 && target < 1.0)) throw ConfigError("calibration target must lie in (0, 1)");
  battery::BatteryParams p;
  if (health == "mid") {
    p = flight::mid_range_params();
  } else if (health == "worst") {
    const battery::HealthRanges box;
    p.q_max = box.q_lo;
    p.r0 = box.r0_hi;
  } else if (health == "best") {
    const battery::HealthRanges box;
    p.q_max = box.q_hi;
    p.r0 = box.r0_lo;
  } else {
    throw ConfigError("--health must be mid, worst or best");
  }
  const auto ref = flight::reference_leg();
  const auto res = count_only ? flight::solve_kappa_for_fraction(ref, target, p)
                              : flight::calibrate_kappa(ref, target, p);
  const auto dir = prepare_out(c.out.empty() ? fs::path("out") : fs::path(c.out));
  const auto profile = flight::build_leg_profile(ref, res.kappa);
  const auto traj = battery::simulate_discharge(p, profile, 1.0, {battery::kDefaultDt, false});
  std::ofstream out(dir / "calibration_trace.csv", std::ios::binary);
  csv::write_row(out, {"t", "current", "voltage", "soc"});
  double z = 1.0;
  double prev_t = 0.0;
  for (const auto& s : traj.samples) {
    z -= s.current * (s.t - prev_t) / p.q_max;
    prev_t = s.t;
    csv::write_row(out, {csv::number(s.t), csv::number(s.current), csv::number(s.voltage), csv::number(z)});
  }
  write_json({{"kappa", res.kappa},
              {"target", target},
              {"final_z", res.final_z},
              {"residual", res.residual},
              {"eod_reached", res.eod_reached},
              {"iterations", res.iterations},
              {"health", health},
              {"eod_checked", !count_only}},
             dir / "calibration.json");
  std::cout << "kappa " << res.kappa << " residual " << res.residual << "\n";
  return kOk;
}

int cmd_train(const Common& c) {
  const auto s = setup(c);
  const auto dir = prepare_out(s.cfg.output_dir);
  std::ofstream(dir / "config.json") << config::to_json(s.cfg) << "\n";
  mission::save_map_json(s.map, dir / "map.json");
  const auto r = train_and_save(s, dir, "");
  std::cout << "trained " << r.curve.size() << " episodes, " << r.gradient_steps << " gradient steps\n";
  return kOk;
}

int cmd_evaluate(const Common& c, const std::string& checkpoint) {
  const auto s = setup(c);
  const auto dir = prepare_out(s.cfg.output_dir);
  const auto ck = dqn::load_checkpoint(checkpoint.empty() ? dir / "checkpoint.json" : fs::path(checkpoint));
  if (ck.n_destinations != s.map.size()) throw ConfigError("checkpoint was trained on a different map size");
  const auto rep = dqn::evaluate(dqn::greedy_policy(ck.net), s.factory, s.cfg.eval_episodes, s.cfg.eval_seed);
  write_json(report_json(rep), dir / "eval.json");
  write_episodes_csv(rep, dir / "eval_episodes.csv");
  std::cout << "mean reward " << rep.mean_reward << " violation rate " << rep.violation_rate << "\n";
  return kOk;
}

int cmd_oracle(const Common& c, int episodes) {
  const auto s = setup(c);
  const auto dir = prepare_out(s.cfg.output_dir);
  oracle::OracleOptions opts;
  opts.kappa = s.env.kappa;
  const int n = std::min(episodes, s.cfg.eval_episodes);
  std::ofstream out(dir / "oracle_episodes.csv", std::ios::binary);
  csv::write_row(out, {"seed", "q_max", "r0", "value", "destinations", "cycles", "violation", "action"});
  double total = 0.0;
  json first;
  for (int k = 0; k < n; ++k) {
    const auto seed = derive_seed(s.cfg.eval_seed, static_cast<std::uint64_t>(k));
    const auto p = mission::episode_params(seed, s.env);
    const auto r = oracle::solve(s.map, s.cfg.scenario, p, opts);
    if (k == 0) first = json::parse(oracle::result_to_json(r));
    total += r.value;
    const auto& a = *r.first_action;
    csv::write_row(out, {std::to_string(seed), csv::number(p.q_max), csv::number(p.r0), csv::number(r.value),
                         csv::number(r.expected_destinations), csv::number(r.expected_cycles),
                         csv::number(r.violation_probability),
                         (a.target == mission::kStation ? "station" : std::to_string(a.target)) + "@" +
                             std::to_string(a.altitude_m)});
  }
  write_json({{"episodes", n}, {"mean_value", total / n}, {"first_episode", first}}, dir / "oracle.json");
  std::cout << "mean oracle value " << total / n << " over " << n << " health draws\n";
  return kOk;
}

int cmd_export(const Common& c, const std::string& checkpoint, std::uint64_t episode_seed) {
  const auto s = setup(c);
  const auto dir = prepare_out(s.cfg.output_dir);
  const auto ck = dqn::load_checkpoint(checkpoint.empty() ? dir / "checkpoint.json" : fs::path(checkpoint));
  if (ck.n_destinations != s.map.size()) throw ConfigError("checkpoint was trained on a different map size");
  dqn::MissionTask task(s.map, s.cfg.scenario, s.env);
  const auto policy = dqn::greedy_policy(ck.net);
  auto x = task.reset(episode_seed);
  for (bool done = false; !done;) {
    const auto step = task.step(policy(x, task.legal()));
    done = step.done;
    x = step.next;
  }
  mission::write_trace_csv(task.trace(), dir / "trace.csv");
  mission::save_map_json(s.map, dir / "map.json");
  std::cout << "episode reward " << task.stats().reward << "\n";
  return kOk;
}

int cmd_sweep(const Common& c, const std::string& param, const std::vector<double>& values) {
  if (param != "gamma_pen" && param != "beta") throw ConfigError("--param must be gamma_pen or beta");
  if (values.empty()) throw ConfigError("--values needs at least one value");
  auto base = setup(c);
  const auto dir = prepare_out(base.cfg.output_dir);
  std::ofstream out(dir / ("sweep_" + param + ".csv"), std::ios::binary);
  csv::write_row(out, {param, "mean_reward", "violation_rate", "mean_cycles", "mean_destinations",
                       "completion_rate", "train_violation_tail"});
  for (double v : values) {
    auto s = base;
    (param == "gamma_pen" ? s.cfg.scenario.gamma_pen : s.cfg.scenario.beta) = v;
    try {
      s.cfg.scenario.validate();
    } catch (const ArgumentError& e) {
      throw ConfigError(e.what());
    }
    s.factory = dqn::mission_task_factory(s.map, s.cfg.scenario, s.env);
    const auto tag = "_" + param + "_" + csv::number(v);
    const auto r = train_and_save(s, dir, tag);
    const auto rep = dqn::evaluate(dqn::greedy_policy(r.net), s.factory, s.cfg.eval_episodes, s.cfg.eval_seed);
    const std::size_t tail = std::max<std::size_t>(1, r.curve.size() / 10);
    double tail_viol = 0.0;
    for (std::size_t i = r.curve.size() - std::min(tail, r.curve.size()); i < r.curve.size(); ++i) {
      tail_viol += r.curve[i].violations;
    }
    tail_viol /= static_cast<double>(std::min(tail, std::max<std::size_t>(1, r.curve.size())));
    csv::write_row(out, {csv::number(v), csv::number(rep.mean_reward), csv::number(rep.violation_rate),
                         csv::number(rep.mean_cycles), csv::number(rep.mean_destinations),
                         csv::number(rep.completion_rate), csv::number(tail_viol)});
    std::cout << param << "=" << v << " violation rate " << rep.violation_rate << " mean cycles "
              << rep.mean_cycles << "\n";
  }
  return kOk;
}

void add_common(CLI::App* cmd, Common& c, bool config_required) {
  auto* opt = cmd->add_option("--config", c.config, "run configuration (JSON)");
  if (config_required) opt->required();
  cmd->add_option("--seed", c.seed, "override the master seed");
  cmd->add_option("--out", c.out, "output directory");
  cmd->add_option("--scenario", c.scenario, "override the scenario (single_flight, single_charge, multi_charge)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"eVTOL battery-aware mission planning"};
  app.require_subcommand(1);
  Common common;

  auto* sim = app.add_subcommand("simulate", "voltage and current trajectories of one leg at every altitude");
  add_common(sim, common, false);
  double distance = 30.0;
  int wind = -13;
  std::optional<double> kappa;
  double q_max = flight::mid_range_params().q_max;
  double r0 = flight::mid_range_params().r0;
  double dt = battery::kDefaultDt;
  sim->add_option("--distance-nm", distance, "leg length")->capture_default_str();
  sim->add_option("--wind", wind, "headwind-positive knots: -39, -26, -13, 13, 26 or 39")->capture_default_str();
  sim->add_option("--kappa", kappa, "current scale (default: calibrated)");
  sim->add_option("--q-max", q_max, "cell capacity in coulombs")->capture_default_str();
  sim->add_option("--r0", r0, "internal resistance in ohms")->capture_default_str();
  sim->add_option("--dt", dt, "integration step in seconds")->capture_default_str();

  auto* cal = app.add_subcommand("calibrate", "fit the current scale to a reference flight");
  add_common(cal, common, false);
  std::optional<double> target;
  std::string health = "mid";
  bool count_only = false;
  cal->add_option("--target", target, "depth of discharge of the reference flight");
  cal->add_option("--health", health, "mid, worst or best")->capture_default_str();
  cal->add_flag("--count-only", count_only, "match charge only and skip the end-of-discharge check");

  auto* tr = app.add_subcommand("train", "train a DQN agent");
  add_common(tr, common, true);

  std::string checkpoint;
  auto* ev = app.add_subcommand("evaluate", "greedy evaluation of a checkpoint");
  add_common(ev, common, true);
  ev->add_option("--checkpoint", checkpoint, "checkpoint file (default: <out>/checkpoint.json)");

  int oracle_episodes = 50;
  auto* orc = app.add_subcommand("oracle", "exact expectimax values on the evaluation health draws");
  add_common(orc, common, true);
  orc->add_option("--episodes", oracle_episodes, "number of health draws")->capture_default_str();

  std::uint64_t episode_seed = 1;
  auto* ex = app.add_subcommand("export", "trace of one greedy episode and the map");
  add_common(ex, common, true);
  ex->add_option("--checkpoint", checkpoint, "checkpoint file (default: <out>/checkpoint.json)");
  ex->add_option("--episode-seed", episode_seed, "episode seed")->capture_default_str();

  std::string param;
  std::vector<double> values;
  auto* sw = app.add_subcommand("sweep", "train and evaluate over reward-parameter values");
  add_common(sw, common, true);
  sw->add_option("--param", param, "gamma_pen or beta")->required();
  sw->add_option("--values", values, "values to sweep")->required()->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*sim) return cmd_simulate(common, distance, wind, kappa, q_max, r0, dt);
    if (*cal) return cmd_calibrate(common, target, health, count_only);
    if (*tr) return cmd_train(common);
    if (*ev) return cmd_evaluate(common, checkpoint);
    if (*orc) return cmd_oracle(common, oracle_episodes);
    if (*ex) return cmd_export(common, checkpoint, episode_seed);
    if (*sw) return cmd_sweep(common, param, values);
  } catch (const ConfigError& e) {
    std::cerr << "error: config: " << e.what() << "\n";
    return kUsage;
  } catch (const TrainingError& e) {
    std::cerr << "error: training: " << e.what() << "\n";
    return kLoss;
  } catch (const CalibrationError& e) {
    std::cerr << "error: calibration: " << e.what() << "\n";
    return kCalibration;
  } catch (const CapacityError& e) {
    std::cerr << "error: capacity: " << e.what() << "\n";
    return kCapacity;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: argument: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return kInternal;
  }
  return kUsage;
}
