#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "evtol/dqn.hpp"
#include "evtol/mission_env.hpp"

namespace evtol::config {

// Where the mission map comes from. Exactly one source is set.
struct MapSource {
  std::optional<std::filesystem::path> file;
  struct Generated {
    std::uint64_t seed = 1;
    int destinations = 4;
    double radius_nm = 30.0;
  };
  std::optional<Generated> generate;
  std::optional<std::vector<mission::Destination>> inline_destinations;
};

struct KappaSource {
  std::optional<double> value;
  std::optional<double> calibration_target;
};

// Declarative description of one run. Every tunable is resolved here; the
// JSON form rejects unknown keys and names any missing one.
struct RunConfig {
  mission::ScenarioConfig scenario;
  MapSource map;
  KappaSource kappa;
  double noise_sigma = 0.005;
  dqn::TrainConfig train;
  int eval_episodes = 500;
  std::uint64_t eval_seed = 777;
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 1;
};

RunConfig parse(const std::string& json_text, const std::filesystem::path& base_dir = {});
RunConfig load(const std::filesystem::path& path);
std::string to_json(const RunConfig& cfg);

// Resolved pieces used by the subcommands.
double resolve_kappa(const RunConfig& cfg);
mission::MissionMap resolve_map(const RunConfig& cfg);
// Largest station distance on the map, used to normalise agent positions.
double map_radius(const mission::MissionMap& map);
mission::EnvConfig env_config(const RunConfig& cfg, const mission::MissionMap& map);

}  // namespace evtol::config
