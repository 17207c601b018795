#include <doctest.h>

#include <fstream>
#include <sstream>

#include "evtol/errors.hpp"
#include "evtol/run_config.hpp"

using namespace evtol;

namespace {

std::string smoke_text() {
  std::ifstream in(std::string(EVTOL_CONFIG_DIR) + "/smoke.json");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string replaced(std::string text, const std::string& from, const std::string& to) {
  const auto at = text.find(from);
  REQUIRE(at != std::string::npos);
  return text.replace(at, from.size(), to);
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("shipped configs parse") {
    for (const char* name : {"smoke", "scenario1_short", "scenario1_long", "scenario2", "scenario3"}) {
      CAPTURE(name);
      CHECK_NOTHROW(config::load(std::string(EVTOL_CONFIG_DIR) + "/" + name + ".json"));
    }
  }

  TEST_CASE("round trip") {
    const auto a = config::parse(smoke_text());
    const auto b = config::parse(config::to_json(a));
    CHECK(config::to_json(a) == config::to_json(b));
    CHECK(b.train.seed == b.seed);
    CHECK(b.train.optimizer == dqn::Optimizer::Adam);
  }

  TEST_CASE("missing and unknown keys are named") {
    const auto text = smoke_text();
    try {
      config::parse(replaced(text, "\"gamma_pen\": 5.0", "\"gamma\": 5.0"));
      FAIL("expected a config error");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("reward.gamma") != std::string::npos);
    }
    try {
      config::parse(replaced(text, "\"seed\": 777", "\"seeds\": 777"));
      FAIL("expected a config error");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("evaluation.seed") != std::string::npos);
    }
    CHECK_THROWS_AS(config::parse(replaced(text, "\"episodes\": 30", "\"episodes\": \"30\"")), ConfigError);
    CHECK_THROWS_AS(config::parse(replaced(text, "\"optimizer\": \"adam\"", "\"optimizer\": \"rmsprop\"")),
                    ConfigError);
    CHECK_THROWS_AS(config::parse(replaced(text, "\"calibration_target\": 0.25",
                                           "\"calibration_target\": 0.25, \"value\": 0.01")),
                    ConfigError);
    CHECK_THROWS_AS(config::parse("{"), ConfigError);
  }

  TEST_CASE("resolution") {
    const auto cfg = config::parse(smoke_text());
    CHECK(config::resolve_kappa(cfg) == doctest::Approx(flight::calibrated_kappa()));
    const auto map = config::resolve_map(cfg);
    CHECK(map.size() == 3);
    const auto env = config::env_config(cfg, map);
    CHECK(env.radius_nm == 12.0);
    CHECK(env.noise_sigma == 0.005);

    auto inline_cfg = config::parse(replaced(smoke_text(), "\"generate\": {\n      \"seed\": 5,\n      \"destinations\": 3,\n      \"radius_nm\": 12.0\n    }",
                                             "\"destinations\": [{\"id\": 1, \"x\": 3.0, \"y\": 4.0, \"priority\": 2}]"));
    const auto m2 = config::resolve_map(inline_cfg);
    CHECK(m2.size() == 1);
    CHECK(config::map_radius(m2) == doctest::Approx(5.0));
  }
}
