#include <doctest.h>

#include <cmath>

#include "evtol/battery.hpp"
#include "evtol/errors.hpp"

using namespace evtol;
using namespace evtol::battery;

namespace {

BatteryParams with(double q, double r) {
  BatteryParams p;
  p.q_max = q;
  p.r0 = r;
  return p;
}

}  // namespace

TEST_SUITE("battery") {
  TEST_CASE("ocv boundaries and midpoint") {
    const BatteryParams p;
    CHECK(ocv(1.0, p) == doctest::Approx(4.2));
    CHECK(ocv(0.0, p) == doctest::Approx(3.0));
    CHECK(ocv(0.5, p) == doctest::Approx(3.6430).epsilon(1e-4));
    CHECK_THROWS_AS(ocv(1.01, p), DomainError);
    CHECK_THROWS_AS(ocv(-0.01, p), DomainError);
  }

  TEST_CASE("ocv strictly increasing") {
    const BatteryParams p;
    double prev = ocv(0.0, p);
    for (int i = 1; i <= 100; ++i) {
      const double v = ocv(i / 100.0, p);
      CHECK(v > prev);
      prev = v;
    }
  }

  TEST_CASE("terminal voltage") {
    CHECK(terminal_voltage(1.0, 0.0, BatteryParams{}) == doctest::Approx(4.2));
    CHECK(terminal_voltage(1.0, 2.0, with(7200, 0.45)) == doctest::Approx(3.30));
    CHECK(terminal_voltage(1.0, 2.0, with(7200, 0.017)) == doctest::Approx(4.166));
    CHECK_THROWS_AS(terminal_voltage(1.0, -1.0, BatteryParams{}), UnsupportedModeError);
  }

  TEST_CASE("euler step") {
    BatteryState s;
    CHECK(step(s, 1.0, 1.0, with(8000, 0.017)).z == doctest::Approx(0.999875));
    s.z = 0.5;
    const auto held = step(s, 0.0, 100.0, BatteryParams{});
    CHECK(held.z == 0.5);
    CHECK(held.t == doctest::Approx(100.0));
    s.z = 0.001;
    CHECK(step(s, 10.0, 1.0, with(5000, 0.017)).z == 0.0);
  }

  TEST_CASE("closed-form end of discharge") {
    CHECK(eod_time_cc(with(7200, 0.017), 2.0) == doctest::Approx(3531.3).epsilon(1e-4));
    // z_eod = 0.75^(1/0.9) = 0.72643, so t = 3600 * (1 - z_eod) = 984.94 s.
    CHECK(eod_time_cc(with(7200, 0.45), 2.0) == doctest::Approx(984.94).epsilon(1e-4));
    CHECK(eod_time_cc(with(7200, 0.6), 2.0) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(eod_time_cc(with(7200, 0.0), 1.0) == doctest::Approx(7200.0));
    CHECK_THROWS_AS(eod_time_cc(BatteryParams{}, 0.0), ArgumentError);
    CHECK_THROWS_AS(eod_time_cc(BatteryParams{}, -1.0), ArgumentError);
  }

  TEST_CASE("simulated discharge matches closed form") {
    for (double r : {0.017, 0.45}) {
      const auto p = with(7200, r);
      const auto traj = simulate_discharge(p, CurrentProfile::constant(2.0, 10000.0), 1.0);
      REQUIRE(traj.eod_reached());
      CHECK(std::abs(*traj.eod_time - eod_time_cc(p, 2.0)) / eod_time_cc(p, 2.0) <= 0.005);
      CHECK(traj.samples.back().voltage <= p.v_cut);
    }
  }

  TEST_CASE("zero current profile keeps charge") {
    const auto traj = simulate_discharge(BatteryParams{}, CurrentProfile::constant(0.0, 100.0), 0.8);
    CHECK_FALSE(traj.eod_reached());
    CHECK(traj.final_z == 0.8);
  }

  TEST_CASE("simulation preconditions") {
    CHECK_THROWS_AS(simulate_discharge(BatteryParams{}, CurrentProfile{}, 1.0), ArgumentError);
    SimulationOptions o;
    o.dt = 2.0;
    CHECK_THROWS_AS(simulate_discharge(BatteryParams{}, CurrentProfile::constant(1, 10), 1.0, o),
                    ArgumentError);
  }

  TEST_CASE("trajectory invariants") {
    CurrentProfile prof;
    prof.segments = {{15.5, 3.0}, {85.0, 3.2}, {900.0, 1.5}, {0.0, 0.0}, {115.0, 0.0}, {15.5, 1.6}};
    const auto p = with(6000, 0.2);
    const auto traj = simulate_discharge(p, prof, 1.0);
    CHECK_FALSE(traj.eod_reached());
    for (std::size_t i = 1; i < traj.samples.size(); ++i) {
      CHECK(traj.samples[i].t > traj.samples[i - 1].t);
      if (traj.samples[i].current == traj.samples[i - 1].current) {
        const double bound = traj.samples[i].current * 0.1 * 1.2 * 0.9 / p.q_max + 1e-3;
        CHECK(std::abs(traj.samples[i].voltage - traj.samples[i - 1].voltage) <= bound);
      }
    }
    // Charge conservation.
    CHECK(traj.final_z == doctest::Approx(1.0 - prof.charge() / p.q_max).epsilon(1e-9));
  }

  TEST_CASE("exact integrator agrees with time stepping") {
    Rng rng(5);
    std::uniform_real_distribution<double> cur(0.5, 6.0), dur(10.0, 900.0), z0(0.2, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
      const auto p = sample_health(rng);
      CurrentProfile prof;
      for (int k = 0; k < 4; ++k) prof.segments.push_back({dur(rng), cur(rng)});
      const double z = z0(rng);
      const auto exact = integrate_profile(p, prof, z);
      const auto sim = simulate_discharge(p, prof, z);
      CHECK(exact.eod == sim.eod_reached());
      if (!exact.eod) CHECK(exact.final_z == doctest::Approx(sim.final_z).epsilon(1e-9));
    }
  }

  TEST_CASE("monotonicity of end of discharge") {
    const double qs[] = {5000, 5750, 6500, 7250, 8000};
    const double rs[] = {0.017, 0.1, 0.2, 0.3, 0.45};
    const double is[] = {0.5, 1.0, 1.5, 2.0, 2.5};
    for (double q : qs) {
      for (double r : rs) {
        for (int k = 1; k < 5; ++k) CHECK(eod_time_cc(with(q, r), is[k]) < eod_time_cc(with(q, r), is[k - 1]));
      }
    }
    for (double i : is) {
      for (int a = 0; a < 5; ++a) {
        for (int b = 1; b < 5; ++b) {
          CHECK(eod_time_cc(with(qs[b], rs[a]), i) > eod_time_cc(with(qs[b - 1], rs[a]), i));
          CHECK(eod_time_cc(with(qs[a], rs[b]), i) < eod_time_cc(with(qs[a], rs[b - 1]), i));
        }
      }
    }
  }

  TEST_CASE("health sampling") {
    Rng rng(42);
    double sum = 0.0;
    double qmin = 1e9, qmax = 0, rmin = 1e9, rmax = 0;
    for (int i = 0; i < 10000; ++i) {
      const auto p = sample_health(rng);
      sum += p.q_max;
      qmin = std::min(qmin, p.q_max);
      qmax = std::max(qmax, p.q_max);
      rmin = std::min(rmin, p.r0);
      rmax = std::max(rmax, p.r0);
      CHECK(p.v_full == 4.2);
    }
    CHECK(qmin >= 5000);
    CHECK(qmax <= 8000);
    CHECK(rmin >= 0.017);
    CHECK(rmax <= 0.45);
    CHECK(std::abs(sum / 10000 - 6500) <= 50);

    Rng a(7), b(7);
    for (int i = 0; i < 10; ++i) CHECK(sample_health(a).q_max == sample_health(b).q_max);

    HealthRanges bad;
    bad.q_lo = 9000;
    CHECK_THROWS_AS(sample_health(rng, bad), ArgumentError);
  }

  TEST_CASE("parameter validation") {
    BatteryParams p;
    CHECK_NOTHROW(p.validate());
    p.p_exp = 2.5;
    CHECK_THROWS(p.validate());
    p = {};
    p.v_cut = 3.1;
    CHECK_THROWS(p.validate());
  }
}
