#include "evtol/profile.hpp"

#include <cmath>

#include "evtol/errors.hpp"

namespace evtol {

std::string_view phase_name(Phase p) {
  switch (p) {
    case Phase::Takeoff: return "takeoff";
    case Phase::Climb: return "climb";
    case Phase::Cruise: return "cruise";
    case Phase::Descent: return "descent";
    case Phase::Approach: return "approach";
    case Phase::Landing: return "landing";
    case Phase::Custom: return "custom";
  }
  return "custom";
}

double distance_nm(const Point& a, const Point& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

double CurrentProfile::duration() const {
  double total = 0.0;
  for (const auto& s : segments) total += s.duration;
  return total;
}

double CurrentProfile::charge() const {
  double total = 0.0;
  for (const auto& s : segments) total += s.duration * s.current;
  return total;
}

CurrentProfile CurrentProfile::truncated(double seconds) const {
  CurrentProfile out;
  out.leg = leg;
  out.kappa = kappa;
  double remaining = seconds;
  for (const auto& s : segments) {
    if (remaining <= 0.0) break;
    CurrentSegment part = s;
    part.duration = std::min(s.duration, remaining);
    remaining -= part.duration;
    out.segments.push_back(part);
  }
  return out;
}

CurrentProfile CurrentProfile::constant(double current, double duration) {
  if (!(duration > 0.0)) throw ArgumentError("constant profile needs a positive duration");
  CurrentProfile p;
  p.segments.push_back({duration, current, Phase::Custom, 0.0});
  return p;
}

}  // namespace evtol
