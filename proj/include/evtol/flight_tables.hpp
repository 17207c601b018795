#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

namespace evtol::flight {

inline constexpr std::array<int, 4> kAltitudes{500, 1000, 2000, 3000};
// Headwind-positive knots; negative entries are tailwinds.
inline constexpr std::array<int, 6> kWinds{-39, -26, -13, 13, 26, 39};
inline constexpr double kKnotToMs = 0.5144;
inline constexpr double kNmToM = 1852.0;
inline constexpr double kTableReferenceNm = 30.0;

// Phase order of the power/duration tables.
enum class TablePhase { Takeoff = 0, Climb, Cruise, Descent, Approach, Landing };
inline constexpr int kTablePhases = 6;

// A table cell carries the literal text it was transcribed from alongside the
// parsed number, so fidelity checks can compare text while the model uses
// numbers. "Negligible" parses to 0.
struct TableCell {
  std::string text;
  double value = 0.0;

  static TableCell parse(std::string text);
};

struct PhaseRow {
  int altitude_m = 0;
  std::array<TableCell, kTablePhases> power_kw;
  std::array<TableCell, kTablePhases> duration_s;
};

struct WindRow {
  int wind_kts = 0;
  TableCell airspeed;  // "41 m/s (79.7 kts)"; value is the m/s figure
  TableCell power_kw;
  TableCell duration_s;
};

struct WindBlock {
  int altitude_m = 0;
  std::array<WindRow, 6> rows;
};

class FlightTables {
 public:
  // Phase-power, phase-duration and wind tables of the reference multirotor.
  static const FlightTables& standard();

  // Override file with columns altitude,phase_or_wind,power_kw,duration_s,airspeed_ms.
  // Rows whose phase_or_wind is a phase name replace phase entries; numeric
  // rows replace wind entries. Entries not mentioned keep the standard value.
  static FlightTables load_csv(const std::filesystem::path& path);

  const PhaseRow& phase_row(int altitude_m) const;
  const WindRow& wind_row(int altitude_m, int wind_kts) const;

  double phase_power_kw(int altitude_m, TablePhase phase) const;
  double phase_duration_s(int altitude_m, TablePhase phase) const;

  const std::array<PhaseRow, 4>& phase_rows() const { return phases_; }
  const std::array<WindBlock, 4>& wind_blocks() const { return winds_; }

 private:
  std::array<PhaseRow, 4> phases_{};
  std::array<WindBlock, 4> winds_{};
};

int altitude_index(int altitude_m);
int wind_index(int wind_kts);
const char* table_phase_name(TablePhase p);

}  // namespace evtol::flight
