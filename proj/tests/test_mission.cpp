#include <doctest.h>

#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "evtol/csv.hpp"
#include "evtol/errors.hpp"
#include "evtol/mission_env.hpp"

using namespace evtol;
using namespace evtol::mission;

namespace {

MissionMap line_map(std::vector<double> xs) {
  MissionMap m;
  int id = 1;
  for (double x : xs) m.destinations.push_back({id++, {x, 0.0}, 1 + (id % 3)});
  return m;
}

ScenarioConfig scenario(Scenario s) {
  ScenarioConfig c;
  c.scenario = s;
  return c;
}

battery::BatteryParams healthy() {
  battery::BatteryParams p;
  p.q_max = 8000;
  p.r0 = 0.017;
  return p;
}

battery::BatteryParams worst() {
  battery::BatteryParams p;
  p.q_max = 5000;
  p.r0 = 0.45;
  return p;
}

}  // namespace

TEST_SUITE("mission") {
  TEST_CASE("map validation") {
    MissionMap m;
    CHECK_THROWS_AS(m.validate(), ArgumentError);
    m = line_map({5, 5});
    CHECK_THROWS_AS(m.validate(), ArgumentError);
    m = line_map({5, 6});
    m.destinations[1].id = 1;
    CHECK_THROWS_AS(m.validate(), ArgumentError);
    m = line_map({5});
    m.destinations[0].priority = 4;
    CHECK_THROWS_AS(m.validate(), ArgumentError);
  }

  TEST_CASE("scenario config") {
    ScenarioConfig c;
    CHECK_NOTHROW(c.validate());
    c.gamma_pen = 0.5;
    CHECK_THROWS(c.validate());
    CHECK(parse_scenario("multi_charge") == Scenario::MultiCharge);
    CHECK(scenario_name(Scenario::SingleFlight) == "single_flight");
    CHECK_THROWS_AS(parse_scenario("other"), ConfigError);
  }

  TEST_CASE("reset") {
    MissionEnv env(line_map({5, 8}), scenario(Scenario::SingleCharge));
    const auto a = env.reset(17);
    const auto b = env.reset(17);
    CHECK(a.pc1 == b.pc1);
    CHECK(a.pc2 == b.pc2);
    CHECK(a.v == doctest::Approx(4.2));
    CHECK(a.visited_mask == 0);
    CHECK(a.cycle_count == 1);
    CHECK(a.pos == Point{0, 0});
    CHECK(a.z_internal == 1.0);
  }

  TEST_CASE("noiseless reset embeds the true health") {
    EnvConfig cfg;
    cfg.noise_sigma = 0.0;
    MissionEnv env(line_map({5}), scenario(Scenario::SingleCharge), cfg);
    for (std::uint64_t seed : {1, 2, 3}) {
      const auto s = env.reset(seed);
      const auto& p = env.true_params();
      CHECK(std::abs(s.pc1 - (p.q_max - 5000) / 3000) <= 0.01);
      CHECK(std::abs(s.pc2 - (p.r0 - 0.017) / 0.433) <= 0.01);
    }
  }

  TEST_CASE("legal action counts") {
    MissionMap m8 = generate_map(3, 8);
    const auto sc = scenario(Scenario::SingleCharge);
    EnvState s;
    CHECK(legal_actions(s, m8, sc).size() == 32);
    s.visited_mask = 0b111;
    s.reached_count = 3;
    s.visits_this_cycle = 3;
    CHECK(legal_actions(s, m8, sc).size() == 24);
    CHECK(legal_actions(EnvState{}, m8, scenario(Scenario::SingleFlight)).size() == 4);
    s.done = true;
    CHECK_THROWS_AS(legal_actions(s, m8, sc), ContractError);
  }

  TEST_CASE("action enumeration round trip") {
    for (int n : {1, 4, 12}) {
      CHECK(action_count(n) == (n + 1) * 4);
      for (int i = 0; i < action_count(n); ++i) CHECK(action_index(action_from_index(i, n), n) == i);
    }
    CHECK(action_from_index(4 * 3 + 2, 3) == Action{kStation, 2000});
  }

  TEST_CASE("single flight with a healthy battery") {
    EnvConfig cfg;
    cfg.fixed_params = healthy();
    MissionEnv env(line_map({10}), scenario(Scenario::SingleFlight), cfg);
    env.reset(1);
    const auto out = env.step({0, 500});
    CHECK(out.done);
    CHECK(out.reward == doctest::Approx(env.map().destinations[0].priority));
    CHECK_FALSE(out.info.eod_violation);
    CHECK_THROWS_AS(env.step({0, 500}), ContractError);
  }

  TEST_CASE("worst health cannot reach a far destination") {
    EnvConfig cfg;
    cfg.fixed_params = worst();
    MissionEnv env(line_map({80}), scenario(Scenario::SingleCharge), cfg);
    env.reset(1);
    const auto out = env.step({0, 500});
    CHECK(out.done);
    CHECK(out.info.eod_violation);
    CHECK(out.reward == -env.scenario().gamma_pen);
    CHECK(out.next_state.visited_mask == 0);
    CHECK(out.next_state.v == env.true_params().v_cut);
  }

  TEST_CASE("multi charge recharge") {
    EnvConfig cfg;
    cfg.fixed_params = healthy();
    MissionEnv env(line_map({4, 8, 12}), scenario(Scenario::MultiCharge), cfg);
    env.reset(5);
    CHECK_THROWS_AS(env.step({kStation, 500}), ContractError);
    env.step({0, 500});
    env.step({1, 500});
    const auto out = env.step({kStation, 500});
    CHECK(out.reward == -env.scenario().beta);
    CHECK_FALSE(out.done);
    CHECK(out.info.recharged);
    CHECK(out.next_state.cycle_count == 2);
    CHECK(out.next_state.z_internal == 1.0);
    CHECK(out.next_state.v == doctest::Approx(4.2));
    const auto last = env.step({2, 500});
    CHECK(last.done);
    CHECK(last.next_state.reached_count == 3);
  }

  TEST_CASE("single charge ends at the station") {
    EnvConfig cfg;
    cfg.fixed_params = healthy();
    MissionEnv env(line_map({4, 8}), scenario(Scenario::SingleCharge), cfg);
    env.reset(5);
    env.step({0, 1000});
    const auto out = env.step({kStation, 1000});
    CHECK(out.done);
    CHECK(out.reward == -env.scenario().beta);
  }

  TEST_CASE("rewards partition and battery consistency") {
    const auto map = generate_map(11, 5, 25);
    const auto sc = scenario(Scenario::MultiCharge);
    MissionEnv env(map, sc);
    Rng pick_rng(3);
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
      env.reset(seed);
      bool done = false;
      int steps = 0;
      while (!done) {
        const auto legal = env.legal_actions();
        std::uniform_int_distribution<std::size_t> pick(0, legal.size() - 1);
        const auto a = legal[pick(pick_rng)];
        const double z0 = env.state().z_internal;
        const auto out = env.step(a);
        ++steps;
        std::set<double> allowed{-sc.gamma_pen, -sc.beta};
        for (const auto& d : map.destinations) allowed.insert(sc.alpha * d.priority);
        CHECK(allowed.count(out.reward) == 1);
        if (out.info.eod_violation) {
          CHECK(out.reward == -sc.gamma_pen);
        } else if (!out.info.recharged) {
          CHECK(out.next_state.z_internal ==
                doctest::Approx(z0 - out.info.leg_charge_c / env.true_params().q_max).epsilon(1e-9));
          CHECK(out.next_state.v > env.true_params().v_cut);
        }
        CHECK(out.next_state.reached_count == std::popcount(out.next_state.visited_mask));
        done = out.done;
      }
      CHECK(steps <= step_cap(map));
    }
  }

  TEST_CASE("replaying a seed replays the episode") {
    const auto map = generate_map(2, 4, 20);
    MissionEnv a(map, scenario(Scenario::SingleCharge)), b(map, scenario(Scenario::SingleCharge));
    a.reset(99);
    b.reset(99);
    for (const Action act : {Action{0, 500}, Action{1, 1000}, Action{kStation, 500}}) {
      if (a.state().done) break;
      const auto oa = a.step(act);
      const auto ob = b.step(act);
      CHECK(oa.reward == ob.reward);
      CHECK(oa.info.wind_kts == ob.info.wind_kts);
      CHECK(oa.next_state.z_internal == ob.next_state.z_internal);
    }
    const auto winds = episode_winds(99, 3);
    MissionEnv c(map, scenario(Scenario::SingleCharge));
    c.reset(99);
    CHECK(c.step({0, 500}).info.wind_kts == winds[0]);
  }

  TEST_CASE("map generation") {
    const auto a = generate_map(4, 8);
    const auto b = generate_map(4, 8);
    REQUIRE(a.size() == 8);
    for (int i = 0; i < 8; ++i) {
      CHECK(a.destinations[static_cast<std::size_t>(i)].pos == b.destinations[static_cast<std::size_t>(i)].pos);
      CHECK(distance_nm(a.station, a.destinations[static_cast<std::size_t>(i)].pos) <= 30.0);
      for (int j = i + 1; j < 8; ++j) {
        CHECK(distance_nm(a.destinations[static_cast<std::size_t>(i)].pos,
                          a.destinations[static_cast<std::size_t>(j)].pos) >= 3.0);
      }
    }
    CHECK_THROWS_AS(generate_map(1, 12, 3.0), GenerationError);
    CHECK_THROWS_AS(generate_map(1, 13), ArgumentError);
  }

  TEST_CASE("map json round trip") {
    const auto m = generate_map(8, 5);
    const auto back = map_from_json(map_to_json(m));
    REQUIRE(back.size() == m.size());
    for (int i = 0; i < m.size(); ++i) {
      CHECK(back.destinations[static_cast<std::size_t>(i)].pos == m.destinations[static_cast<std::size_t>(i)].pos);
      CHECK(back.destinations[static_cast<std::size_t>(i)].priority ==
            m.destinations[static_cast<std::size_t>(i)].priority);
    }
    CHECK_THROWS_AS(map_from_json("{\"station\": [0, 0]}"), ConfigError);
  }

  TEST_CASE("trace csv") {
    const auto path = std::filesystem::temp_directory_path() / "evtol_trace.csv";
    write_trace_csv({{1, {0, 500}, 13, 2.0, 3.9, 0.8, 1}, {2, {kStation, 1000}, -26, -1.0, 3.7, 0.6, 1}}, path);
    std::ifstream in(path);
    const auto rows = csv::read(in);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0] == csv::Row{"step", "action", "wind", "reward", "v", "z", "cycle"});
    CHECK(rows[1][1] == "0@500");
    CHECK(rows[2][1] == "station@1000");
    std::filesystem::remove(path);
  }
}
