#pragma once

#include <optional>
#include <vector>

#include "evtol/profile.hpp"
#include "evtol/rng.hpp"

namespace evtol::battery {

// Two-knob reduced-order 18650 cell: OCV(z) = v_min + (v_full - v_min) z^p_exp,
// terminal voltage OCV(z) - I r0, coulomb counting on z.
struct BatteryParams {
  double q_max = 7200.0;  // C
  double r0 = 0.017;      // ohm
  double v_full = 4.2;
  double v_min = 3.0;
  double p_exp = 0.9;
  double v_cut = 3.0;

  void validate() const;
};

struct BatteryState {
  double z = 1.0;
  double v_terminal = 4.2;
  double t = 0.0;
};

struct TrajectorySample {
  double t;
  double current;
  double voltage;
};

struct VoltageTrajectory {
  std::vector<TrajectorySample> samples;
  std::optional<double> eod_time;
  double final_z = 1.0;

  bool eod_reached() const { return eod_time.has_value(); }
};

// Sampling box for degradation parameters.
struct HealthRanges {
  double q_lo = 5000.0;
  double q_hi = 8000.0;
  double r0_lo = 0.017;
  double r0_hi = 0.45;
};

inline constexpr double kDefaultDt = 0.1;

double ocv(double z, const BatteryParams& params);
double terminal_voltage(double z, double current, const BatteryParams& params);
BatteryState step(const BatteryState& state, double current, double dt,
                  const BatteryParams& params);

struct SimulationOptions {
  double dt = kDefaultDt;
  // Observation traces keep integrating past the cutoff.
  bool stop_at_eod = true;
};

// Time-stepped integration of a piecewise-constant load. The first sample is
// at t = 0 under the first non-empty segment's current; every later sample is
// the state at the end of an integration step. EOD time is the linear
// interpolation of the first crossing of v_cut.
VoltageTrajectory simulate_discharge(const BatteryParams& params,
                                     const CurrentProfile& profile,
                                     double initial_z,
                                     const SimulationOptions& options = {});

// Exact piecewise integration without sampling. Within a constant-current
// segment the terminal voltage decreases monotonically, so checking the
// segment start (after the current step) and end decides EOD exactly as
// simulate_discharge does; only the crossing time is not resolved.
struct DischargeOutcome {
  double final_z = 1.0;
  double charge_used = 0.0;      // C, up to the end of the profile or EOD
  double min_voltage = 0.0;
  bool eod = false;
};

DischargeOutcome integrate_profile(const BatteryParams& params,
                                   const CurrentProfile& profile,
                                   double initial_z);

// Closed-form end-of-discharge time under constant current from z = 1.
double eod_time_cc(const BatteryParams& params, double current);

BatteryParams sample_health(Rng& rng, const HealthRanges& ranges = {});

}  // namespace evtol::battery
