#pragma once

#include <optional>
#include <string_view>
#include <vector>

namespace evtol {

enum class Phase { Takeoff, Climb, Cruise, Descent, Approach, Landing, Custom };

std::string_view phase_name(Phase p);

struct Point {
  double x = 0.0;  // nm
  double y = 0.0;  // nm
  friend bool operator==(const Point&, const Point&) = default;
};

double distance_nm(const Point& a, const Point& b);

// One point-to-point flight. Wind is headwind-positive knots.
struct Leg {
  Point origin;
  Point dest;
  double distance_nm = 0.0;
  int altitude_m = 500;
  int wind_kts = -13;
};

// Constant per-cell current held for `duration` seconds.
struct CurrentSegment {
  double duration = 0.0;  // s
  double current = 0.0;   // A, discharge positive
  Phase phase = Phase::Custom;
  double pack_power_kw = 0.0;
};

struct CurrentProfile {
  std::vector<CurrentSegment> segments;
  std::optional<Leg> leg;
  double kappa = 1.0;

  double duration() const;
  double charge() const;  // coulombs drawn from one cell
  bool empty() const { return segments.empty(); }
  // First `seconds` of the profile, splitting the segment that straddles it.
  CurrentProfile truncated(double seconds) const;
  // Constant-current convenience profile.
  static CurrentProfile constant(double current, double duration);
};

}  // namespace evtol
