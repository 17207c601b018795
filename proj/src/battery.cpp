#include "evtol/battery.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "evtol/errors.hpp"

namespace evtol::battery {

void BatteryParams::validate() const {
  if (!(q_max > 0.0)) throw ArgumentError("q_max must be positive");
  if (!(r0 >= 0.0)) throw ArgumentError("r0 must be non-negative");
  if (!(v_full > v_min)) throw ArgumentError("v_full must exceed v_min");
  if (!(v_cut <= v_min)) throw ArgumentError("v_cut must not exceed v_min");
  if (!(p_exp > 0.0 && p_exp <= 2.0)) throw ArgumentError("p_exp must lie in (0, 2]");
}

double ocv(double z, const BatteryParams& params) {
  if (!(z >= 0.0 && z <= 1.0)) {
    throw DomainError("state of charge " + std::to_string(z) + " outside [0, 1]");
  }
  return params.v_min + (params.v_full - params.v_min) * std::pow(z, params.p_exp);
}

double terminal_voltage(double z, double current, const BatteryParams& params) {
  if (current < 0.0) throw UnsupportedModeError("charging current is not modelled");
  return ocv(z, params) - current * params.r0;
}

BatteryState step(const BatteryState& state, double current, double dt,
                  const BatteryParams& params) {
  if (!(dt > 0.0)) throw ArgumentError("dt must be positive");
  if (!(state.z >= 0.0 && state.z <= 1.0)) throw DomainError("state of charge outside [0, 1]");
  BatteryState next;
  next.z = std::max(0.0, state.z - current * dt / params.q_max);
  next.v_terminal = terminal_voltage(next.z, current, params);
  next.t = state.t + dt;
  return next;
}

VoltageTrajectory simulate_discharge(const BatteryParams& params,
                                     const CurrentProfile& profile,
                                     double initial_z,
                                     const SimulationOptions& options) {
  if (profile.empty()) throw ArgumentError("empty current profile");
  if (!(options.dt > 0.0 && options.dt <= 1.0)) throw ArgumentError("dt must lie in (0, 1] s");

  const auto first = std::find_if(profile.segments.begin(), profile.segments.end(),
                                  [](const CurrentSegment& s) { return s.duration > 0.0; });
  if (first == profile.segments.end()) throw ArgumentError("profile has zero total duration");

  VoltageTrajectory traj;
  const std::size_t expected = static_cast<std::size_t>(profile.duration() / options.dt) + 8;
  traj.samples.reserve(expected);

  BatteryState state{initial_z, terminal_voltage(initial_z, first->current, params), 0.0};
  traj.samples.push_back({0.0, first->current, state.v_terminal});
  traj.final_z = initial_z;
  if (options.stop_at_eod && state.v_terminal <= params.v_cut) {
    traj.eod_time = 0.0;
    return traj;
  }

  double seg_start = 0.0;
  for (const auto& seg : profile.segments) {
    if (seg.duration <= 0.0) continue;
    const auto n_steps = static_cast<long>(std::ceil(seg.duration / options.dt - 1e-9));
    for (long k = 0; k < n_steps; ++k) {
      const double t0 = static_cast<double>(k) * options.dt;
      const double t1 = std::min(static_cast<double>(k + 1) * options.dt, seg.duration);
      if (t1 <= t0) break;
      const TrajectorySample prev = traj.samples.back();
      state = step(state, seg.current, t1 - t0, params);
      state.t = seg_start + t1;
      traj.samples.push_back({state.t, seg.current, state.v_terminal});
      traj.final_z = state.z;
      if (options.stop_at_eod && state.v_terminal <= params.v_cut) {
        const double dv = prev.voltage - state.v_terminal;
        const double frac = dv > 0.0 ? (prev.voltage - params.v_cut) / dv : 1.0;
        traj.eod_time = prev.t + std::clamp(frac, 0.0, 1.0) * (state.t - prev.t);
        return traj;
      }
    }
    seg_start += seg.duration;
  }
  return traj;
}

namespace {

// SOC at which the terminal voltage under `current` equals v_cut, or a
// negative number when the cutoff is unreachable at that current.
double cutoff_soc(const BatteryParams& params, double current) {
  const double num = params.v_cut - params.v_min + current * params.r0;
  if (num < 0.0) return -1.0;
  return std::pow(num / (params.v_full - params.v_min), 1.0 / params.p_exp);
}

}  // namespace

DischargeOutcome integrate_profile(const BatteryParams& params,
                                   const CurrentProfile& profile,
                                   double initial_z) {
  DischargeOutcome out;
  double z = initial_z;
  out.min_voltage = ocv(z, params);
  for (const auto& seg : profile.segments) {
    if (seg.duration <= 0.0) continue;
    const double v_start = terminal_voltage(z, seg.current, params);
    out.min_voltage = std::min(out.min_voltage, v_start);
    if (v_start <= params.v_cut) {
      out.eod = true;
      break;
    }
    const double z_end = std::max(0.0, z - seg.current * seg.duration / params.q_max);
    const double v_end = terminal_voltage(z_end, seg.current, params);
    if (v_end <= params.v_cut) {
      const double z_cut = std::max(0.0, cutoff_soc(params, seg.current));
      out.charge_used += (z - z_cut) * params.q_max;
      z = z_cut;
      out.min_voltage = std::min(out.min_voltage, v_end);
      out.eod = true;
      break;
    }
    out.charge_used += (z - z_end) * params.q_max;
    out.min_voltage = std::min(out.min_voltage, v_end);
    z = z_end;
  }
  out.final_z = z;
  return out;
}

double eod_time_cc(const BatteryParams& params, double current) {
  if (!(current > 0.0)) throw ArgumentError("eod_time_cc needs a positive current");
  const double z_eod = cutoff_soc(params, current);
  if (z_eod < 0.0) return std::numeric_limits<double>::infinity();
  if (z_eod >= 1.0) return 0.0;
  return params.q_max * (1.0 - z_eod) / current;
}

BatteryParams sample_health(Rng& rng, const HealthRanges& ranges) {
  if (!(ranges.q_lo <= ranges.q_hi) || !(ranges.r0_lo <= ranges.r0_hi)) {
    throw ArgumentError("inverted health sampling range");
  }
  std::uniform_real_distribution<double> q(ranges.q_lo, ranges.q_hi);
  std::uniform_real_distribution<double> r(ranges.r0_lo, ranges.r0_hi);
  BatteryParams p;
  p.q_max = q(rng);
  p.r0 = r(rng);
  return p;
}

}  // namespace evtol::battery
