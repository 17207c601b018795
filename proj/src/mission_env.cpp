#include "evtol/mission_env.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

#include "evtol/csv.hpp"
#include "evtol/errors.hpp"

namespace evtol::mission {

using flight::kAltitudes;
using flight::kWinds;

const Point& MissionMap::node(int index) const {
  if (index == kStation) return station;
  if (index < 0 || index >= size()) throw ContractError("node index out of range");
  return destinations[static_cast<std::size_t>(index)].pos;
}

void MissionMap::validate() const {
  if (destinations.empty() || size() > kMaxDestinations) {
    throw ArgumentError("a mission map needs 1 to 12 destinations");
  }
  std::set<int> ids;
  for (const auto& d : destinations) {
    if (!ids.insert(d.id).second) throw ArgumentError("duplicate destination id " + std::to_string(d.id));
    if (d.priority < 1 || d.priority > 3) throw ArgumentError("priority must be 1, 2 or 3");
    if (d.pos == station) throw ArgumentError("destination coincides with the station");
  }
  for (std::size_t i = 0; i < destinations.size(); ++i) {
    for (std::size_t j = i + 1; j < destinations.size(); ++j) {
      if (destinations[i].pos == destinations[j].pos) throw ArgumentError("duplicate destination position");
    }
  }
}

std::string scenario_name(Scenario s) {
  switch (s) {
    case Scenario::SingleFlight: return "single_flight";
    case Scenario::SingleCharge: return "single_charge";
    case Scenario::MultiCharge: return "multi_charge";
  }
  return "?";
}

Scenario parse_scenario(const std::string& name) {
  if (name == "single_flight") return Scenario::SingleFlight;
  if (name == "single_charge") return Scenario::SingleCharge;
  if (name == "multi_charge") return Scenario::MultiCharge;
  throw ConfigError("unknown scenario '" + name + "'");
}

void ScenarioConfig::validate() const {
  // beta = 0 is admitted for the station-penalty sweep.
  if (!(alpha > 0.0)) throw ArgumentError("alpha must be positive");
  if (!(beta >= 0.0)) throw ArgumentError("beta must be non-negative");
  if (!(gamma_pen > 0.0)) throw ArgumentError("gamma_pen must be positive");
  if (!(gamma_pen >= beta)) throw ArgumentError("gamma_pen must be at least beta");
}

int action_count(int n_destinations) {
  return (n_destinations + 1) * static_cast<int>(kAltitudes.size());
}

int action_index(const Action& a, int n_destinations) {
  const int slot = a.target == kStation ? n_destinations : a.target;
  return slot * static_cast<int>(kAltitudes.size()) + flight::altitude_index(a.altitude_m);
}

Action action_from_index(int index, int n_destinations) {
  const int per = static_cast<int>(kAltitudes.size());
  if (index < 0 || index >= action_count(n_destinations)) throw ContractError("action index out of range");
  const int slot = index / per;
  return {slot == n_destinations ? kStation : slot, kAltitudes[static_cast<std::size_t>(index % per)]};
}

std::vector<Action> legal_actions(const EnvState& state, const MissionMap& map,
                                  const ScenarioConfig& cfg) {
  if (state.done) throw ContractError("legal_actions called on a terminal state");
  std::vector<Action> out;
  if (cfg.scenario == Scenario::SingleFlight) {
    for (int alt : kAltitudes) out.push_back({0, alt});
    return out;
  }
  for (int d = 0; d < map.size(); ++d) {
    if (state.visited_mask & (1u << d)) continue;
    for (int alt : kAltitudes) out.push_back({d, alt});
  }
  if (state.visits_this_cycle > 0) {
    for (int alt : kAltitudes) out.push_back({kStation, alt});
  }
  return out;
}

LegResolution resolve_leg(const MissionMap& map, const ScenarioConfig& cfg, int from_index,
                          const Action& action, int wind_kts,
                          const battery::BatteryParams& params, double z, double kappa) {
  const auto leg = flight::make_leg(map.node(from_index), map.node(action.target), action.altitude_m,
                                    wind_kts);
  const auto profile = flight::build_leg_profile(leg, kappa);
  const auto outcome = battery::integrate_profile(params, profile, z);
  LegResolution res;
  res.eod = outcome.eod;
  res.z_after = outcome.final_z;
  res.charge = outcome.charge_used;
  res.duration = profile.duration();
  res.distance = leg.distance_nm;
  if (outcome.eod) {
    res.reward = -cfg.gamma_pen;
  } else if (action.target == kStation) {
    res.reward = -cfg.beta;
  } else {
    res.reward = cfg.alpha * map.destinations[static_cast<std::size_t>(action.target)].priority;
  }
  return res;
}

int step_cap(const MissionMap& map) { return map.size() * (map.size() + 1); }

namespace {

enum Stream : std::uint64_t { kHealthStream = 1, kWindStream = 2, kNoiseStream = 3 };

int draw_wind(Rng& rng) {
  std::uniform_int_distribution<int> pick(0, static_cast<int>(kWinds.size()) - 1);
  return kWinds[static_cast<std::size_t>(pick(rng))];
}

}  // namespace

std::vector<int> episode_winds(std::uint64_t seed, int legs) {
  Rng rng(derive_seed(seed, kWindStream));
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(legs));
  for (int k = 0; k < legs; ++k) out.push_back(draw_wind(rng));
  return out;
}

battery::BatteryParams episode_params(std::uint64_t seed, const EnvConfig& env) {
  if (env.fixed_params) return *env.fixed_params;
  Rng rng(derive_seed(seed, kHealthStream));
  return battery::sample_health(rng, env.health);
}

MissionEnv::MissionEnv(MissionMap map, ScenarioConfig cfg, EnvConfig env)
    : map_(std::move(map)), cfg_(cfg), env_(std::move(env)) {
  map_.validate();
  cfg_.validate();
  if (map_.size() > 32) throw ArgumentError("visited mask holds at most 32 destinations");
}

void MissionEnv::refresh_health() {
  const auto leg = flight::make_leg(map_.station, {flight::kTableReferenceNm, 0.0},
                                    env_.observation_altitude_m, -13);
  const auto profile = flight::build_leg_profile(leg, env_.kappa);
  const auto obs = prediction::observe(params_, profile, 1.0, env_.noise_sigma, noise_rng_,
                                       env_.observation_period);
  estimate_ = prediction::infer_health(obs);
  const auto e = prediction::embed(estimate_, env_.health);
  state_.pc1 = e.pc1;
  state_.pc2 = e.pc2;
}

const EnvState& MissionEnv::reset(std::uint64_t seed) {
  params_ = episode_params(seed, env_);
  wind_rng_.seed(derive_seed(seed, kWindStream));
  noise_rng_.seed(derive_seed(seed, kNoiseStream));
  state_ = EnvState{};
  state_.pos = map_.station;
  state_.z_internal = 1.0;
  state_.v = battery::ocv(1.0, params_);
  refresh_health();
  live_ = true;
  return state_;
}

std::vector<Action> MissionEnv::legal_actions() const {
  if (!live_) throw ContractError("environment not reset");
  return mission::legal_actions(state_, map_, cfg_);
}

StepOutcome MissionEnv::step(const Action& action) {
  if (!live_ || state_.done) throw ContractError("step called on a terminal or un-reset environment");
  const auto legal = legal_actions();
  if (std::find(legal.begin(), legal.end(), action) == legal.end()) {
    throw ContractError("illegal action");
  }

  StepOutcome out;
  out.info.wind_kts = draw_wind(wind_rng_);
  const auto res = resolve_leg(map_, cfg_, state_.pos_index, action, out.info.wind_kts, params_,
                               state_.z_internal, env_.kappa);
  out.reward = res.reward;
  out.info.leg_distance_nm = res.distance;
  out.info.leg_duration_s = res.duration;
  out.info.leg_charge_c = res.charge;

  EnvState& s = state_;
  s.steps += 1;
  s.z_internal = res.z_after;
  if (res.eod) {
    out.info.eod_violation = true;
    s.done = true;
    s.v = params_.v_cut;
  } else if (action.target == kStation) {
    s.pos = map_.station;
    s.pos_index = kStation;
    s.visits_this_cycle = 0;
    if (cfg_.scenario == Scenario::MultiCharge) {
      s.z_internal = 1.0;
      s.cycle_count += 1;
      out.info.recharged = true;
      refresh_health();
    } else {
      s.done = true;
    }
    s.v = battery::ocv(s.z_internal, params_);
  } else {
    s.pos = map_.node(action.target);
    s.pos_index = action.target;
    s.visited_mask |= 1u << action.target;
    s.reached_count = std::popcount(s.visited_mask);
    s.visits_this_cycle += 1;
    s.v = battery::ocv(s.z_internal, params_);
    if (cfg_.scenario == Scenario::SingleFlight) s.done = true;
    if (cfg_.scenario == Scenario::MultiCharge && s.reached_count == map_.size()) s.done = true;
  }
  if (!s.done && s.steps >= step_cap(map_)) {
    s.done = true;
    out.info.truncated = true;
  }
  out.done = s.done;
  out.next_state = s;
  return out;
}

MissionMap generate_map(std::uint64_t seed, int n_destinations, double radius_nm) {
  if (n_destinations < 1 || n_destinations > kMaxDestinations) {
    throw ArgumentError("n_destinations must lie in [1, 12]");
  }
  if (!(radius_nm > 0.0)) throw ArgumentError("radius must be positive");
  constexpr double kMinSeparation = 3.0;
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> priority(1, 3);
  MissionMap map;
  int tries = 0;
  while (map.size() < n_destinations) {
    if (++tries > 10000) throw GenerationError("could not place destinations with 3 nm separation");
    const double r = radius_nm * std::sqrt(unit(rng));
    const double th = 2.0 * std::numbers::pi * unit(rng);
    const Point p{r * std::cos(th), r * std::sin(th)};
    bool ok = distance_nm(p, map.station) >= kMinSeparation;
    for (const auto& d : map.destinations) ok = ok && distance_nm(p, d.pos) >= kMinSeparation;
    if (!ok) continue;
    map.destinations.push_back({map.size() + 1, p, priority(rng)});
  }
  return map;
}

std::string map_to_json(const MissionMap& map) {
  nlohmann::json j;
  j["station"] = {map.station.x, map.station.y};
  j["destinations"] = nlohmann::json::array();
  for (const auto& d : map.destinations) {
    j["destinations"].push_back({{"id", d.id}, {"x", d.pos.x}, {"y", d.pos.y}, {"priority", d.priority}});
  }
  return j.dump(2);
}

MissionMap map_from_json(const std::string& text) {
  MissionMap map;
  try {
    const auto j = nlohmann::json::parse(text);
    const auto& st = j.at("station");
    map.station = {st.at(0).get<double>(), st.at(1).get<double>()};
    for (const auto& d : j.at("destinations")) {
      map.destinations.push_back({d.at("id").get<int>(), {d.at("x").get<double>(), d.at("y").get<double>()},
                                  d.at("priority").get<int>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed map json: ") + e.what());
  }
  map.validate();
  return map;
}

MissionMap load_map_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open map file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return map_from_json(ss.str());
}

void save_map_json(const MissionMap& map, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write map file " + path.string());
  out << map_to_json(map) << "\n";
}

void write_trace_csv(const std::vector<TraceRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write trace " + path.string());
  csv::write_row(out, {"step", "action", "wind", "reward", "v", "z", "cycle"});
  for (const auto& r : rows) {
    const std::string target = r.action.target == kStation ? "station" : std::to_string(r.action.target);
    csv::write_row(out, {std::to_string(r.step), target + "@" + std::to_string(r.action.altitude_m),
                         std::to_string(r.wind_kts), csv::number(r.reward), csv::number(r.v),
                         csv::number(r.z), std::to_string(r.cycle)});
  }
}

}  // namespace evtol::mission
