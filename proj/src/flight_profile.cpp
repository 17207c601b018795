#include "evtol/flight_profile.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "evtol/errors.hpp"

namespace evtol::flight {

double cruise_ground_speed(int altitude_m, int wind_kts, const FlightTables& tables) {
  const auto& row = tables.wind_row(altitude_m, wind_kts);
  return row.airspeed.value - static_cast<double>(wind_kts) * kKnotToMs;
}

Leg make_leg(const Point& origin, const Point& dest, int altitude_m, int wind_kts) {
  altitude_index(altitude_m);
  wind_index(wind_kts);
  Leg leg;
  leg.origin = origin;
  leg.dest = dest;
  leg.distance_nm = distance_nm(origin, dest);
  leg.altitude_m = altitude_m;
  leg.wind_kts = wind_kts;
  return leg;
}

CurrentProfile build_leg_profile(const Leg& leg, double kappa, double nominal_voltage,
                                 const FlightTables& tables) {
  if (!(kappa >= 0.0)) throw ArgumentError("kappa must be non-negative");
  if (!(leg.distance_nm >= 0.0)) throw ArgumentError("leg distance must be non-negative");
  if (!(nominal_voltage > 0.0)) throw ArgumentError("nominal voltage must be positive");

  const auto& row = tables.phase_row(leg.altitude_m);
  const auto& wind = tables.wind_row(leg.altitude_m, leg.wind_kts);
  const double amps_per_kw = kappa * 1000.0 / (kCellsPerPack * nominal_voltage);

  CurrentProfile profile;
  profile.leg = leg;
  profile.kappa = kappa;
  auto add = [&](Phase phase, double duration, double power_kw) {
    profile.segments.push_back({duration, power_kw * amps_per_kw, phase, power_kw});
  };
  auto tab = [&](TablePhase p) {
    const int i = static_cast<int>(p);
    return std::pair{row.duration_s[i].value, row.power_kw[i].value};
  };

  const auto [to_t, to_p] = tab(TablePhase::Takeoff);
  const auto [land_t, land_p] = tab(TablePhase::Landing);
  if (leg.distance_nm == 0.0) {
    add(Phase::Takeoff, to_t, to_p);
    add(Phase::Landing, land_t, land_p);
    return profile;
  }

  const auto [climb_t, climb_p] = tab(TablePhase::Climb);
  const auto [desc_t, desc_p] = tab(TablePhase::Descent);
  const auto [appr_t, appr_p] = tab(TablePhase::Approach);
  const double ground_speed = wind.airspeed.value - leg.wind_kts * kKnotToMs;
  if (!(ground_speed > 0.0)) throw TableError("non-positive ground speed");
  const double cruise_t = leg.distance_nm * kNmToM / ground_speed;

  add(Phase::Takeoff, to_t, to_p);
  add(Phase::Climb, climb_t, climb_p);
  add(Phase::Cruise, cruise_t, wind.power_kw.value);
  add(Phase::Descent, desc_t, desc_p);
  add(Phase::Approach, appr_t, appr_p);
  add(Phase::Landing, land_t, land_p);
  return profile;
}

double leg_energy(const CurrentProfile& profile) {
  double kj = 0.0;
  for (const auto& s : profile.segments) kj += s.pack_power_kw * s.duration;
  return kj;
}

Leg reference_leg() {
  Leg leg;
  leg.origin = {0.0, 0.0};
  leg.dest = {kTableReferenceNm, 0.0};
  leg.distance_nm = kTableReferenceNm;
  leg.altitude_m = 1000;
  leg.wind_kts = -13;
  return leg;
}

battery::BatteryParams mid_range_params() {
  battery::BatteryParams p;
  p.q_max = 6500.0;
  p.r0 = 0.23;
  return p;
}

CalibrationResult solve_kappa_for_fraction(const Leg& reference, double target_fraction,
                                           const battery::BatteryParams& params) {
  if (!(target_fraction > 0.0 && target_fraction < 1.0)) {
    throw ArgumentError("target fraction must lie in (0, 1)");
  }
  // Coulomb counting only: lift the cutoff out of reach.
  battery::BatteryParams counting = params;
  counting.v_cut = -std::numeric_limits<double>::infinity();
  const double target_z = 1.0 - target_fraction;
  auto final_z = [&](double kappa) {
    return battery::integrate_profile(counting, build_leg_profile(reference, kappa), 1.0).final_z;
  };

  double lo = 0.0;
  double hi = 1.0;
  while (final_z(hi) > target_z) {
    hi *= 2.0;
    if (hi > 1e6) throw CalibrationError("reference flight cannot reach the target depth");
  }
  CalibrationResult res;
  for (res.iterations = 0; res.iterations < 200; ++res.iterations) {
    const double mid = 0.5 * (lo + hi);
    if (final_z(mid) > target_z) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-12) break;
  }
  res.kappa = 0.5 * (lo + hi);
  res.final_z = final_z(res.kappa);
  res.residual = std::abs(res.final_z - target_z);
  res.eod_reached = battery::integrate_profile(params, build_leg_profile(reference, res.kappa), 1.0).eod;
  return res;
}

CalibrationResult calibrate_kappa(const Leg& reference, double target_fraction,
                                  const battery::BatteryParams& params) {
  auto res = solve_kappa_for_fraction(reference, target_fraction, params);
  if (res.eod_reached) {
    throw CalibrationError("reference flight reaches end of discharge at kappa=" +
                           std::to_string(res.kappa) + " for target fraction " +
                           std::to_string(target_fraction));
  }
  if (res.residual > 0.005) throw CalibrationError("calibration residual above tolerance");
  return res;
}

double calibrated_kappa() {
  static const double kappa =
      calibrate_kappa(reference_leg(), kDefaultCalibrationTarget, mid_range_params()).kappa;
  return kappa;
}

}  // namespace evtol::flight
