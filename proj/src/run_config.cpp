#include "evtol/run_config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "evtol/errors.hpp"

namespace evtol::config {

using nlohmann::json;

namespace {

// Strict view of one JSON object: every key must be read exactly from the
// allowed set, and finish() rejects whatever was not consumed.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + " must be an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& at(const std::string& key) {
    if (!j_.contains(key)) throw ConfigError("missing config key '" + qualify(key) + "'");
    used_.insert(key);
    return j_.at(key);
  }

  template <class T>
  T get(const std::string& key) {
    const auto& v = at(key);
    try {
      return v.get<T>();
    } catch (const json::exception&) {
      throw ConfigError("config key '" + qualify(key) + "' has the wrong type");
    }
  }

  Section sub(const std::string& key) { return Section(at(key), qualify(key)); }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) throw ConfigError("unknown config key '" + qualify(it.key()) + "'");
    }
  }

  std::string qualify(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  std::string where() const { return path_.empty() ? "config" : "'" + path_ + "'"; }

  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

dqn::Optimizer parse_optimizer(const std::string& name) {
  if (name == "sgd") return dqn::Optimizer::Sgd;
  if (name == "adam") return dqn::Optimizer::Adam;
  throw ConfigError("unknown optimizer '" + name + "' (expected sgd or adam)");
}

std::string optimizer_name(dqn::Optimizer o) { return o == dqn::Optimizer::Adam ? "adam" : "sgd"; }

MapSource parse_map(Section s, const std::filesystem::path& base_dir) {
  MapSource m;
  int sources = 0;
  if (s.has("file")) {
    std::filesystem::path p = s.get<std::string>("file");
    m.file = p.is_absolute() || base_dir.empty() ? p : base_dir / p;
    ++sources;
  }
  if (s.has("generate")) {
    auto g = s.sub("generate");
    MapSource::Generated gen;
    gen.seed = g.get<std::uint64_t>("seed");
    gen.destinations = g.get<int>("destinations");
    gen.radius_nm = g.get<double>("radius_nm");
    g.finish();
    m.generate = gen;
    ++sources;
  }
  if (s.has("destinations")) {
    std::vector<mission::Destination> ds;
    const auto& arr = s.at("destinations");
    if (!arr.is_array()) throw ConfigError("'map.destinations' must be an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      Section d(arr[i], "map.destinations[" + std::to_string(i) + "]");
      ds.push_back({d.get<int>("id"), {d.get<double>("x"), d.get<double>("y")}, d.get<int>("priority")});
      d.finish();
    }
    m.inline_destinations = std::move(ds);
    ++sources;
  }
  s.finish();
  if (sources != 1) throw ConfigError("'map' needs exactly one of file, generate or destinations");
  return m;
}

}  // namespace

RunConfig parse(const std::string& json_text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig cfg;
  Section top(root, "");

  cfg.scenario.scenario = mission::parse_scenario(top.get<std::string>("scenario"));
  cfg.map = parse_map(top.sub("map"), base_dir);

  {
    auto r = top.sub("reward");
    cfg.scenario.alpha = r.get<double>("alpha");
    cfg.scenario.beta = r.get<double>("beta");
    cfg.scenario.gamma_pen = r.get<double>("gamma_pen");
    r.finish();
  }
  {
    auto k = top.sub("kappa");
    if (k.has("value")) cfg.kappa.value = k.get<double>("value");
    if (k.has("calibration_target")) cfg.kappa.calibration_target = k.get<double>("calibration_target");
    k.finish();
    if (cfg.kappa.value.has_value() == cfg.kappa.calibration_target.has_value()) {
      throw ConfigError("'kappa' needs exactly one of value or calibration_target");
    }
  }
  cfg.noise_sigma = top.get<double>("noise_sigma");
  {
    auto t = top.sub("train");
    auto& tc = cfg.train;
    tc.discount = t.get<double>("discount");
    tc.learning_rate = t.get<double>("learning_rate");
    tc.batch_size = t.get<int>("batch_size");
    tc.buffer_capacity = t.get<int>("buffer_capacity");
    tc.target_sync_steps = t.get<int>("target_sync_steps");
    tc.epsilon_start = t.get<double>("epsilon_start");
    tc.epsilon_decay = t.get<double>("epsilon_decay");
    tc.epsilon_min = t.get<double>("epsilon_min");
    tc.episodes = t.get<int>("episodes");
    tc.hidden = t.get<std::vector<int>>("hidden");
    tc.optimizer = parse_optimizer(t.get<std::string>("optimizer"));
    tc.train_every = t.get<int>("train_every");
    t.finish();
  }
  {
    auto e = top.sub("evaluation");
    cfg.eval_episodes = e.get<int>("episodes");
    cfg.eval_seed = e.get<std::uint64_t>("seed");
    e.finish();
  }
  cfg.output_dir = top.get<std::string>("output_dir");
  cfg.seed = top.get<std::uint64_t>("seed");
  top.finish();

  try {
    cfg.scenario.validate();
    cfg.train.validate();
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  }
  if (!(cfg.noise_sigma >= 0.0)) throw ConfigError("noise_sigma must be non-negative");
  if (cfg.eval_episodes < 1) throw ConfigError("evaluation.episodes must be positive");
  cfg.train.seed = cfg.seed;
  return cfg;
}

RunConfig load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.parent_path());
}

std::string to_json(const RunConfig& cfg) {
  json j;
  j["scenario"] = mission::scenario_name(cfg.scenario.scenario);
  json map = json::object();
  if (cfg.map.file) map["file"] = cfg.map.file->string();
  if (cfg.map.generate) {
    map["generate"] = {{"seed", cfg.map.generate->seed},
                       {"destinations", cfg.map.generate->destinations},
                       {"radius_nm", cfg.map.generate->radius_nm}};
  }
  if (cfg.map.inline_destinations) {
    map["destinations"] = json::array();
    for (const auto& d : *cfg.map.inline_destinations) {
      map["destinations"].push_back({{"id", d.id}, {"x", d.pos.x}, {"y", d.pos.y}, {"priority", d.priority}});
    }
  }
  j["map"] = map;
  j["reward"] = {{"alpha", cfg.scenario.alpha}, {"beta", cfg.scenario.beta}, {"gamma_pen", cfg.scenario.gamma_pen}};
  j["kappa"] = cfg.kappa.value ? json{{"value", *cfg.kappa.value}}
                               : json{{"calibration_target", *cfg.kappa.calibration_target}};
  j["noise_sigma"] = cfg.noise_sigma;
  const auto& t = cfg.train;
  j["train"] = {{"discount", t.discount},
                {"learning_rate", t.learning_rate},
                {"batch_size", t.batch_size},
                {"buffer_capacity", t.buffer_capacity},
                {"target_sync_steps", t.target_sync_steps},
                {"epsilon_start", t.epsilon_start},
                {"epsilon_decay", t.epsilon_decay},
                {"epsilon_min", t.epsilon_min},
                {"episodes", t.episodes},
                {"hidden", t.hidden},
                {"optimizer", optimizer_name(t.optimizer)},
                {"train_every", t.train_every}};
  j["evaluation"] = {{"episodes", cfg.eval_episodes}, {"seed", cfg.eval_seed}};
  j["output_dir"] = cfg.output_dir.string();
  j["seed"] = cfg.seed;
  return j.dump(2);
}

double resolve_kappa(const RunConfig& cfg) {
  if (cfg.kappa.value) {
    if (!(*cfg.kappa.value >= 0.0) || !std::isfinite(*cfg.kappa.value)) {
      throw ConfigError("kappa must be finite and non-negative");
    }
    return *cfg.kappa.value;
  }
  return flight::calibrate_kappa(flight::reference_leg(), *cfg.kappa.calibration_target,
                                 flight::mid_range_params())
      .kappa;
}

mission::MissionMap resolve_map(const RunConfig& cfg) {
  mission::MissionMap map;
  try {
    if (cfg.map.file) return mission::load_map_json(*cfg.map.file);
    if (cfg.map.generate) {
      return mission::generate_map(cfg.map.generate->seed, cfg.map.generate->destinations,
                                   cfg.map.generate->radius_nm);
    }
    map.destinations = *cfg.map.inline_destinations;
    map.validate();
  } catch (const ArgumentError& e) {
    throw ConfigError(std::string("invalid map: ") + e.what());
  }
  return map;
}

double map_radius(const mission::MissionMap& map) {
  double r = 0.0;
  for (const auto& d : map.destinations) r = std::max(r, distance_nm(map.station, d.pos));
  return r;
}

mission::EnvConfig env_config(const RunConfig& cfg, const mission::MissionMap& map) {
  mission::EnvConfig env;
  env.kappa = resolve_kappa(cfg);
  env.noise_sigma = cfg.noise_sigma;
  env.radius_nm = cfg.map.generate ? cfg.map.generate->radius_nm : map_radius(map);
  return env;
}

}  // namespace evtol::config
