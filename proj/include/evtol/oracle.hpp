#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "evtol/dqn.hpp"
#include "evtol/mission_env.hpp"

namespace evtol::oracle {

inline constexpr int kMaxExactDestinations = 6;

struct OracleOptions {
  double kappa = flight::calibrated_kappa();
  double z_quantum = 1e-4;  // memo key resolution; 0 disables memoisation
  int max_destinations = kMaxExactDestinations;
};

struct OracleResult {
  double value = 0.0;
  std::optional<mission::Action> first_action;
  double expected_destinations = 0.0;
  double expected_cycles = 1.0;
  double violation_probability = 0.0;
  std::vector<double> root_values;  // per legal root action, legal_actions order
  std::vector<mission::Action> root_actions;
  std::uint64_t node_count = 0;
  double wall_seconds = 0.0;
};

// Exact expectimax over the six equiprobable winds per leg with the true
// battery known. Root actions are searched in parallel, each with its own
// memo, so the result does not depend on the schedule.
OracleResult solve(const mission::MissionMap& map, const mission::ScenarioConfig& cfg,
                   const battery::BatteryParams& params, const OracleOptions& opts = {});
OracleResult solve_serial(const mission::MissionMap& map, const mission::ScenarioConfig& cfg,
                          const battery::BatteryParams& params, const OracleOptions& opts = {});

// Deterministic dynamic program with the wind of leg k fixed to winds[k].
// Among optimal plans the one with the fewest charging cycles is reported.
OracleResult solve_fixed_wind(const mission::MissionMap& map, const mission::ScenarioConfig& cfg,
                              const battery::BatteryParams& params, const std::vector<int>& winds,
                              const OracleOptions& opts = {});

// Policy that acts on the expectimax argmax, reading the hidden SOC back from
// the rest voltage with the true parameters. Assumes the first charging cycle.
dqn::Policy clairvoyant_policy(const mission::MissionMap& map, const mission::ScenarioConfig& cfg,
                               const battery::BatteryParams& params, double radius_nm = 30.0,
                               const OracleOptions& opts = {});

struct GapReport {
  double oracle_value = 0.0;
  double policy_value = 0.0;
  double policy_ci[2] = {0, 0};
  double gap = 0.0;  // relative when the oracle value is positive, else absolute
  bool relative = true;
};

GapReport policy_gap(const dqn::Policy& policy, const OracleResult& oracle, const dqn::TaskFactory& factory,
                     int n_eval, std::uint64_t seed);

std::string result_to_json(const OracleResult& r);
void save_result_json(const OracleResult& r, const std::filesystem::path& path);

}  // namespace evtol::oracle
