#include "evtol/oracle.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <unordered_map>

#include <json.hpp>

#include "evtol/errors.hpp"

namespace evtol::oracle {

using mission::Action;
using mission::kStation;
using mission::Scenario;

namespace {

constexpr int kAlts = static_cast<int>(flight::kAltitudes.size());
constexpr int kWindCount = static_cast<int>(flight::kWinds.size());

// Leg outcome as a function of the starting SOC: EOD iff z <= threshold,
// otherwise z drops by dz. Values within kGuard of the threshold fall back to
// the full integrator so both paths agree with the environment.
struct LegEntry {
  double dz = 0.0;
  double threshold = -1.0;
  CurrentProfile profile;
};

constexpr double kGuard = 1e-9;

struct Outcome {
  double value = 0.0;
  double destinations = 0.0;
  double cycles = 0.0;  // final cycle count
  double violation = 0.0;
};

struct Node {
  std::uint32_t mask = 0;
  int pos = kStation;
  double z = 1.0;
  int cycles = 1;
  int steps = 0;
};

class Planner {
 public:
  Planner(const mission::MissionMap& map, const mission::ScenarioConfig& cfg,
          const battery::BatteryParams& params, const OracleOptions& opts, const std::vector<int>* winds)
      : map_(map), cfg_(cfg), params_(params), opts_(opts), winds_(winds), n_(map.size()),
        cap_(mission::step_cap(map)) {
    build_table();
  }

  std::vector<Action> legal(const Node& s) const {
    mission::EnvState es;
    es.visited_mask = s.mask;
    es.visits_this_cycle = s.pos == kStation ? 0 : 1;
    return mission::legal_actions(es, map_, cfg_);
  }

  // Expected (or, with fixed winds, realised) value of taking `a` from `s`.
  Outcome q_value(const Node& s, const Action& a) {
    if (winds_) {
      if (s.steps >= static_cast<int>(winds_->size())) {
        throw ArgumentError("wind sequence shorter than the plan");
      }
      return transition(s, a, flight::wind_index((*winds_)[static_cast<std::size_t>(s.steps)]));
    }
    Outcome acc;
    for (int w = 0; w < kWindCount; ++w) {
      const auto o = transition(s, a, w);
      acc.value += o.value / kWindCount;
      acc.destinations += o.destinations / kWindCount;
      acc.cycles += o.cycles / kWindCount;
      acc.violation += o.violation / kWindCount;
    }
    return acc;
  }

  Outcome value(const Node& s) {
    const bool memo = opts_.z_quantum > 0.0;
    std::uint64_t key = 0;
    if (memo) {
      key = static_cast<std::uint64_t>(std::llround(s.z / opts_.z_quantum)) |
            (static_cast<std::uint64_t>(s.cycles) << 32) |
            (static_cast<std::uint64_t>(s.pos + 1) << 40) | (static_cast<std::uint64_t>(s.mask) << 44);
      if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    }
    ++nodes_;
    Outcome best;
    bool have = false;
    for (const auto& a : legal(s)) {
      const auto o = q_value(s, a);
      if (!have || better(o, best)) {
        best = o;
        have = true;
      }
    }
    if (memo) memo_.emplace(key, best);
    return best;
  }

  bool better(const Outcome& a, const Outcome& b) const {
    if (winds_) {
      constexpr double tol = 1e-9;
      if (a.value > b.value + tol) return true;
      if (a.value < b.value - tol) return false;
      return a.cycles < b.cycles;
    }
    return a.value > b.value;
  }

  std::uint64_t nodes() const { return nodes_; }

 private:
  static int slot(int index, int n) { return index == kStation ? n : index; }

  const LegEntry& entry(int from, int to, int alt, int wind) const {
    const std::size_t k =
        ((static_cast<std::size_t>(slot(from, n_)) * (n_ + 1) + slot(to, n_)) * kAlts + alt) * kWindCount + wind;
    return table_[k];
  }

  void build_table() {
    table_.resize(static_cast<std::size_t>((n_ + 1) * (n_ + 1) * kAlts * kWindCount));
    for (int from = -1; from < n_; ++from) {
      for (int to = -1; to < n_; ++to) {
        for (int ai = 0; ai < kAlts; ++ai) {
          for (int wi = 0; wi < kWindCount; ++wi) {
            auto& e = const_cast<LegEntry&>(entry(from, to, ai, wi));
            const auto leg = flight::make_leg(map_.node(from), map_.node(to), flight::kAltitudes[ai],
                                              flight::kWinds[wi]);
            e.profile = flight::build_leg_profile(leg, opts_.kappa);
            double cum = 0.0;
            e.threshold = -1.0;
            for (const auto& seg : e.profile.segments) {
              if (seg.duration <= 0.0) continue;
              cum += seg.current * seg.duration / params_.q_max;
              const double num = params_.v_cut - params_.v_min + seg.current * params_.r0;
              if (num < 0.0) continue;
              const double zc = std::pow(num / (params_.v_full - params_.v_min), 1.0 / params_.p_exp);
              e.threshold = std::max(e.threshold, zc + cum);
            }
            e.dz = cum;
          }
        }
      }
    }
  }

  Outcome transition(const Node& s, const Action& a, int wind) {
    const auto& e = entry(s.pos, a.target, flight::altitude_index(a.altitude_m), wind);
    bool eod;
    double z_after;
    if (std::abs(s.z - e.threshold) < kGuard) {
      const auto out = battery::integrate_profile(params_, e.profile, s.z);
      eod = out.eod;
      z_after = out.final_z;
    } else {
      eod = s.z <= e.threshold;
      z_after = s.z - e.dz;
    }

    Outcome o;
    o.cycles = s.cycles;
    if (eod) {
      o.value = -cfg_.gamma_pen;
      o.violation = 1.0;
      return o;
    }
    Node next = s;
    next.steps += 1;
    next.z = z_after;
    bool terminal = false;
    if (a.target == kStation) {
      o.value = -cfg_.beta;
      next.pos = kStation;
      if (cfg_.scenario == Scenario::MultiCharge) {
        next.z = 1.0;
        next.cycles += 1;
      } else {
        terminal = true;
      }
    } else {
      o.value = cfg_.alpha * map_.destinations[static_cast<std::size_t>(a.target)].priority;
      o.destinations = 1.0;
      next.pos = a.target;
      next.mask |= 1u << a.target;
      if (cfg_.scenario == Scenario::SingleFlight) terminal = true;
      if (cfg_.scenario == Scenario::MultiCharge && std::popcount(next.mask) == n_) terminal = true;
    }
    if (!terminal && next.steps >= cap_) terminal = true;
    o.cycles = next.cycles;
    if (terminal) return o;
    const auto rest = value(next);
    o.value += rest.value;
    o.destinations += rest.destinations;
    o.cycles = rest.cycles;
    o.violation = rest.violation;
    return o;
  }

  mission::MissionMap map_;
  mission::ScenarioConfig cfg_;
  battery::BatteryParams params_;
  OracleOptions opts_;
  const std::vector<int>* winds_;
  int n_;
  int cap_;
  std::vector<LegEntry> table_;
  std::unordered_map<std::uint64_t, Outcome> memo_;
  std::uint64_t nodes_ = 0;
};

void check_inputs(const mission::MissionMap& map, const mission::ScenarioConfig& cfg,
                  const battery::BatteryParams& params) {
  map.validate();
  cfg.validate();
  params.validate();
}

OracleResult assemble(std::vector<Action> actions, const std::vector<Outcome>& outs,
                      std::uint64_t nodes, bool fixed_wind) {
  OracleResult r;
  r.root_actions = std::move(actions);
  int best = -1;
  for (std::size_t i = 0; i < outs.size(); ++i) {
    r.root_values.push_back(outs[i].value);
    bool take = best < 0;
    if (!take) {
      const auto& b = outs[static_cast<std::size_t>(best)];
      if (fixed_wind) {
        take = outs[i].value > b.value + 1e-9 || (outs[i].value >= b.value - 1e-9 && outs[i].cycles < b.cycles);
      } else {
        take = outs[i].value > b.value;
      }
    }
    if (take) best = static_cast<int>(i);
  }
  const auto& o = outs[static_cast<std::size_t>(best)];
  r.value = o.value;
  r.first_action = r.root_actions[static_cast<std::size_t>(best)];
  r.expected_destinations = o.destinations;
  r.expected_cycles = o.cycles;
  r.violation_probability = o.violation;
  r.node_count = nodes + 1;
  return r;
}

OracleResult solve_impl(const mission::MissionMap& map, const mission::ScenarioConfig& cfg,
                        const battery::BatteryParams& params, const OracleOptions& opts, bool parallel) {
  check_inputs(map, cfg, params);
  if (map.size() > opts.max_destinations) {
    throw CapacityError("exact expectimax is limited to " + std::to_string(opts.max_destinations) +
                        " destinations; use solve_fixed_wind for larger maps");
  }
  const auto t0 = std::chrono::steady_clock::now();
  const Node root;
  Planner probe(map, cfg, params, opts, nullptr);
  auto actions = probe.legal(root);
  std::vector<Outcome> outs(actions.size());
  std::vector<std::uint64_t> nodes(actions.size(), 0);
  std::exception_ptr failure;

#pragma omp parallel for schedule(dynamic) if (parallel)
  for (std::size_t i = 0; i < actions.size(); ++i) {
    try {
      Planner p(map, cfg, params, opts, nullptr);
      outs[i] = p.q_value(root, actions[i]);
      nodes[i] = p.nodes();
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  std::uint64_t total = 0;
  for (auto n : nodes) total += n;
  auto r = assemble(std::move(actions), outs, total, false);
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace

OracleResult solve(const mission::MissionMap& map, const mission::ScenarioConfig& cfg,
                   const battery::BatteryParams& params, const OracleOptions& opts) {
  return solve_impl(map, cfg, params, opts, true);
}

OracleResult solve_serial(const mission::MissionMap& map, const mission::ScenarioConfig& cfg,
                          const battery::BatteryParams& params, const OracleOptions& opts) {
  return solve_impl(map, cfg, params, opts, false);
}

OracleResult solve_fixed_wind(const mission::MissionMap& map, const mission::ScenarioConfig& cfg,
                              const battery::BatteryParams& params, const std::vector<int>& winds,
                              const OracleOptions& opts) {
  check_inputs(map, cfg, params);
  for (int w : winds) flight::wind_index(w);
  const auto t0 = std::chrono::steady_clock::now();
  const Node root;
  Planner p(map, cfg, params, opts, &winds);
  auto actions = p.legal(root);
  std::vector<Outcome> outs;
  for (const auto& a : actions) outs.push_back(p.q_value(root, a));
  auto r = assemble(std::move(actions), outs, p.nodes(), true);
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

dqn::Policy clairvoyant_policy(const mission::MissionMap& map, const mission::ScenarioConfig& cfg,
                               const battery::BatteryParams& params, double radius_nm,
                               const OracleOptions& opts) {
  check_inputs(map, cfg, params);
  if (map.size() > opts.max_destinations) throw CapacityError("map too large for the exact planner");
  // The planner and its memo are shared across calls, so the returned policy
  // must not be called concurrently.
  auto planner = std::make_shared<Planner>(map, cfg, params, opts, nullptr);
  const int n = map.size();
  return [planner, map, params, radius_nm, n](std::span<const double> x, std::span<const int> legal) {
    Node s;
    for (int d = 0; d < n; ++d) {
      if (x[6 + static_cast<std::size_t>(d)] > 0.5) s.mask |= 1u << d;
    }
    const Point here{x[3] * radius_nm, x[4] * radius_nm};
    double best_d = distance_nm(here, map.station);
    for (int d = 0; d < n; ++d) {
      const double dd = distance_nm(here, map.destinations[static_cast<std::size_t>(d)].pos);
      if (dd < best_d) {
        best_d = dd;
        s.pos = d;
      }
    }
    // The rest voltage inverts the open-circuit curve.
    const double v = 3.0 + 1.2 * x[2];
    const double frac = std::clamp((v - params.v_min) / (params.v_full - params.v_min), 0.0, 1.0);
    s.z = std::pow(frac, 1.0 / params.p_exp);
    s.steps = std::popcount(s.mask);
    Outcome best;
    int choice = -1;
    for (int idx : legal) {
      const auto o = planner->q_value(s, mission::action_from_index(idx, n));
      if (choice < 0 || planner->better(o, best)) {
        best = o;
        choice = idx;
      }
    }
    return choice;
  };
}

GapReport policy_gap(const dqn::Policy& policy, const OracleResult& oracle, const dqn::TaskFactory& factory,
                     int n_eval, std::uint64_t seed) {
  const auto rep = dqn::evaluate_serial(policy, factory, n_eval, seed);
  GapReport g;
  g.oracle_value = oracle.value;
  g.policy_value = rep.mean_reward;
  g.policy_ci[0] = rep.reward_ci[0];
  g.policy_ci[1] = rep.reward_ci[1];
  if (oracle.value > 0.0) {
    g.relative = true;
    g.gap = (oracle.value - rep.mean_reward) / std::abs(oracle.value);
  } else {
    g.relative = false;
    g.gap = oracle.value - rep.mean_reward;
  }
  return g;
}

std::string result_to_json(const OracleResult& r) {
  nlohmann::json j;
  j["value"] = r.value;
  if (r.first_action) {
    j["action"] = {{"target", r.first_action->target}, {"altitude_m", r.first_action->altitude_m}};
  } else {
    j["action"] = nullptr;
  }
  j["expected_destinations"] = r.expected_destinations;
  j["expected_cycles"] = r.expected_cycles;
  j["violation_probability"] = r.violation_probability;
  j["node_count"] = r.node_count;
  j["wall_seconds"] = r.wall_seconds;
  nlohmann::json roots = nlohmann::json::array();
  for (std::size_t i = 0; i < r.root_actions.size(); ++i) {
    roots.push_back({{"target", r.root_actions[i].target},
                     {"altitude_m", r.root_actions[i].altitude_m},
                     {"value", r.root_values[i]}});
  }
  j["root_actions"] = roots;
  return j.dump(2);
}

void save_result_json(const OracleResult& r, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write oracle result " + path.string());
  out << result_to_json(r) << "\n";
}

}  // namespace evtol::oracle
