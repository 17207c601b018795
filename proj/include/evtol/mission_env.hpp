#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "evtol/battery.hpp"
#include "evtol/discharge_prediction.hpp"
#include "evtol/flight_profile.hpp"
#include "evtol/profile.hpp"
#include "evtol/rng.hpp"

namespace evtol::mission {

inline constexpr int kStation = -1;
inline constexpr int kMaxDestinations = 12;

struct Destination {
  int id = 0;
  Point pos;
  int priority = 1;  // 1..3
};

struct MissionMap {
  Point station{0.0, 0.0};
  std::vector<Destination> destinations;

  int size() const { return static_cast<int>(destinations.size()); }
  // Position of a node index (kStation or a destination index).
  const Point& node(int index) const;
  void validate() const;
};

enum class Scenario { SingleFlight, SingleCharge, MultiCharge };

std::string scenario_name(Scenario s);
Scenario parse_scenario(const std::string& name);

// Reward parameters of the mission MDP. gamma_pen is the end-of-discharge
// penalty, not the learning discount.
struct ScenarioConfig {
  Scenario scenario = Scenario::SingleCharge;
  double alpha = 1.0;
  double beta = 1.0;
  double gamma_pen = 5.0;

  void validate() const;
};

// Knobs of the simulated plant that are not part of the reward.
struct EnvConfig {
  double kappa = flight::calibrated_kappa();
  double noise_sigma = prediction::kDefaultNoiseSigma;
  double observation_period = prediction::kObservationPeriod;
  battery::HealthRanges health{};
  double radius_nm = 30.0;  // normalisation of positions in the agent state
  int observation_altitude_m = 500;
  // Pin the hidden battery instead of sampling it (oracle comparisons).
  std::optional<battery::BatteryParams> fixed_params;
};

struct EnvState {
  double pc1 = 0.0;
  double pc2 = 0.0;
  double v = 0.0;  // terminal voltage at the current node, load removed
  Point pos;
  int pos_index = kStation;
  int reached_count = 0;
  std::uint32_t visited_mask = 0;
  int visits_this_cycle = 0;
  int cycle_count = 1;
  int steps = 0;
  double z_internal = 1.0;  // hidden from the agent
  bool done = false;
};

struct Action {
  int target = kStation;  // destination index or kStation
  int altitude_m = 500;
  friend bool operator==(const Action&, const Action&) = default;
};

struct StepInfo {
  int wind_kts = 0;
  double leg_distance_nm = 0.0;
  double leg_duration_s = 0.0;
  double leg_charge_c = 0.0;
  bool eod_violation = false;
  bool recharged = false;
  bool truncated = false;
};

struct StepOutcome {
  EnvState next_state;
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

// Fixed global action enumeration: index = target_slot * 4 + altitude_index,
// with target_slot = destination index, or n for the station.
int action_count(int n_destinations);
int action_index(const Action& a, int n_destinations);
Action action_from_index(int index, int n_destinations);

std::vector<Action> legal_actions(const EnvState& state, const MissionMap& map,
                                  const ScenarioConfig& cfg);

// Battery and reward resolution of one leg; shared by the environment and
// the planners so both see identical dynamics.
struct LegResolution {
  double reward = 0.0;
  bool eod = false;
  double z_after = 1.0;
  double charge = 0.0;
  double duration = 0.0;
  double distance = 0.0;
};

LegResolution resolve_leg(const MissionMap& map, const ScenarioConfig& cfg, int from_index,
                          const Action& action, int wind_kts,
                          const battery::BatteryParams& params, double z, double kappa);

// Maximum number of steps before an episode is truncated.
int step_cap(const MissionMap& map);

// Mission environment. Owns the hidden battery and the random streams; the
// wind of leg k is the k-th draw of the episode's wind stream, independent of
// the actions taken.
class MissionEnv {
 public:
  MissionEnv(MissionMap map, ScenarioConfig cfg, EnvConfig env = {});

  const EnvState& reset(std::uint64_t seed);
  std::vector<Action> legal_actions() const;
  StepOutcome step(const Action& action);

  const EnvState& state() const { return state_; }
  const MissionMap& map() const { return map_; }
  const ScenarioConfig& scenario() const { return cfg_; }
  const EnvConfig& env_config() const { return env_; }
  const battery::BatteryParams& true_params() const { return params_; }
  const prediction::HealthEstimate& health_estimate() const { return estimate_; }

 private:
  void refresh_health();

  MissionMap map_;
  ScenarioConfig cfg_;
  EnvConfig env_;
  EnvState state_;
  battery::BatteryParams params_;
  prediction::HealthEstimate estimate_;
  Rng wind_rng_;
  Rng noise_rng_;
  bool live_ = false;
};

// Winds an episode with this seed will see, in leg order.
std::vector<int> episode_winds(std::uint64_t seed, int legs);
// Hidden battery an episode with this seed will carry.
battery::BatteryParams episode_params(std::uint64_t seed, const EnvConfig& env);

MissionMap generate_map(std::uint64_t seed, int n_destinations, double radius_nm = 30.0);

MissionMap load_map_json(const std::filesystem::path& path);
void save_map_json(const MissionMap& map, const std::filesystem::path& path);
std::string map_to_json(const MissionMap& map);
MissionMap map_from_json(const std::string& text);

struct TraceRow {
  int step = 0;
  Action action;
  int wind_kts = 0;
  double reward = 0.0;
  double v = 0.0;
  double z = 0.0;
  int cycle = 1;
};

void write_trace_csv(const std::vector<TraceRow>& rows, const std::filesystem::path& path);

}  // namespace evtol::mission
