#pragma once

#include "evtol/battery.hpp"
#include "evtol/flight_tables.hpp"
#include "evtol/profile.hpp"

namespace evtol::flight {

// 10S50P pack of 18650 cells at 3.7 V nominal.
inline constexpr int kCellsPerPack = 500;
inline constexpr double kNominalCellVoltage = 3.7;
// Starting point for kappa before calibration.
inline constexpr double kDefaultKappa = 0.04;
// Depth of discharge of the reference flight used to calibrate kappa.
inline constexpr double kDefaultCalibrationTarget = 0.25;

// Ground speed in m/s for a headwind-positive wind in knots.
double cruise_ground_speed(int altitude_m, int wind_kts,
                           const FlightTables& tables = FlightTables::standard());

Leg make_leg(const Point& origin, const Point& dest, int altitude_m, int wind_kts);

// Per-cell current profile of a leg: the six tabulated phases in flight order,
// cruise stretched to cover the leg distance at table ground speed. A
// zero-distance leg is a vertical hop (takeoff and landing only).
CurrentProfile build_leg_profile(const Leg& leg, double kappa,
                                 double nominal_voltage = kNominalCellVoltage,
                                 const FlightTables& tables = FlightTables::standard());

// Pack-level energy in kJ, independent of kappa.
double leg_energy(const CurrentProfile& profile);

struct CalibrationResult {
  double kappa = 0.0;
  double final_z = 1.0;
  double residual = 0.0;  // |final z - (1 - target)|
  bool eod_reached = false;
  int iterations = 0;
};

// Default reference flight: 30 nm at 1000 m with a 13 kt tailwind.
Leg reference_leg();
battery::BatteryParams mid_range_params();

// Bisection on kappa so that the reference flight, started full, ends at
// z = 1 - target_fraction. Does not check end of discharge.
CalibrationResult solve_kappa_for_fraction(const Leg& reference, double target_fraction,
                                           const battery::BatteryParams& params);

// As above, but the reference flight must complete without reaching EOD;
// throws CalibrationError otherwise.
CalibrationResult calibrate_kappa(const Leg& reference, double target_fraction,
                                  const battery::BatteryParams& params);

// kappa calibrated on the default reference flight, mid-range health and
// kDefaultCalibrationTarget. Computed once.
double calibrated_kappa();

}  // namespace evtol::flight
