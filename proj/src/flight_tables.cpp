#include "evtol/flight_tables.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <string>

#include "evtol/csv.hpp"
#include "evtol/errors.hpp"

namespace evtol::flight {

namespace {

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

struct PhaseLiteral {
  int altitude;
  const char* power[kTablePhases];
  const char* duration[kTablePhases];
};

// Power required (kW) and phase duration (s), simulated 30 nm flight, 13 kts tailwind.
constexpr PhaseLiteral kPhaseLiterals[] = {
    {500, {"264.94", "273.53", "138.39", "Negligible", "Negligible", "139.45"},
     {"15.51", "85", "1167", "0", "115", "15.5"}},
    {1000, {"264.94", "272.66", "141.72", "Negligible", "Negligible", "139.45"},
     {"15.51", "180", "1143", "11.4", "115", "15.5"}},
    {2000, {"264.94", "273.03", "145.68", "Negligible", "Negligible", "139.45"},
     {"15.51", "369", "1120", "32.6", "115", "15.5"}},
    {3000, {"264.94", "273.13", "155.44", "Negligible", "Negligible", "139.45"},
     {"15.51", "558", "1056", "52.1", "115", "15.5"}},
};

struct WindLiteral {
  int wind;
  const char* airspeed;
  const char* power;
  const char* duration;
};

// Cruise airspeed, power (kW) and 30 nm cruise duration (s) per wind magnitude.
constexpr WindLiteral kWindLiterals[4][6] = {
    {{-39, "38 m/s (73.9 kts)", "130.57", "959"},
     {-26, "39 m/s (75.8 kts)", "132.92", "1063"},
     {-13, "41 m/s (79.7 kts)", "138.39", "1167"},
     {13, "45 m/s (87.5 kts)", "152.18", "1453"},
     {26, "48 m/s (93.3 kts)", "165.22", "1608"},
     {39, "52 m/s (101.1 kts)", "186.36", "1743"}},
    {{-39, "39 m/s (75.8 kts)", "133.78", "943"},
     {-26, "40 m/s (77.7 kts)", "136.18", "1043"},
     {-13, "42 m/s (81.6 kts)", "141.72", "1143"},
     {13, "46 m/s (89.4 kts)", "155.59", "1416"},
     {26, "49 m/s (95.2 kts)", "168.61", "1563"},
     {39, "53 m/s (103.1 kts)", "189.71", "1690"}},
    // The -13 row's knot figure is kept verbatim although 43 m/s is 83.6 kts.
    {{-39, "41 m/s (79.7 kts)", "140.75", "911"},
     {-26, "42 m/s (81.6 kts)", "143.01", "1005"},
     {-13, "43 m/s (93.3 kts)", "148.68", "1120"},
     {13, "48 m/s (93.3 kts)", "162.21", "1347"},
     {26, "51 m/s (99.1 kts)", "174.99", "1479"},
     {39, "55 m/s (106.9 kts)", "195.3", "1594"}},
    {{-39, "43 m/s (83.6 kts)", "147.82", "882"},
     {-26, "44 m/s (85.5 kts)", "150.07", "970"},
     {-13, "46 m/s (89.4 kts)", "155.44", "1056"},
     {13, "50 m/s (97.1 kts)", "172.61", "1256"},
     {26, "53 m/s (103.0 kts)", "181.03", "1405"},
     {39, "57 m/s (110.8 kts)", "200.77", "1507"}},
};

FlightTables build_standard() {
  FlightTables t = FlightTables::load_csv({});
  return t;
}

int phase_from_name(const std::string& name) {
  for (int p = 0; p < kTablePhases; ++p) {
    if (name == table_phase_name(static_cast<TablePhase>(p))) return p;
  }
  return -1;
}

}  // namespace

TableCell TableCell::parse(std::string text) {
  TableCell cell;
  cell.text = trim(std::move(text));
  if (cell.text.empty()) throw TableError("empty table cell");
  std::string lower = cell.text;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "negligible") {
    cell.value = 0.0;
    return cell;
  }
  try {
    std::size_t used = 0;
    cell.value = std::stod(cell.text, &used);
  } catch (const std::exception&) {
    throw TableError("unparseable table cell '" + cell.text + "'");
  }
  return cell;
}

const char* table_phase_name(TablePhase p) {
  switch (p) {
    case TablePhase::Takeoff: return "takeoff";
    case TablePhase::Climb: return "climb";
    case TablePhase::Cruise: return "cruise";
    case TablePhase::Descent: return "descent";
    case TablePhase::Approach: return "approach";
    case TablePhase::Landing: return "landing";
  }
  return "?";
}

int altitude_index(int altitude_m) {
  for (std::size_t i = 0; i < kAltitudes.size(); ++i) {
    if (kAltitudes[i] == altitude_m) return static_cast<int>(i);
  }
  throw TableError("altitude " + std::to_string(altitude_m) + " m is not tabulated");
}

int wind_index(int wind_kts) {
  for (std::size_t i = 0; i < kWinds.size(); ++i) {
    if (kWinds[i] == wind_kts) return static_cast<int>(i);
  }
  throw TableError("wind " + std::to_string(wind_kts) + " kts is not tabulated");
}

const FlightTables& FlightTables::standard() {
  static const FlightTables tables = build_standard();
  return tables;
}

FlightTables FlightTables::load_csv(const std::filesystem::path& path) {
  FlightTables t;
  for (int a = 0; a < 4; ++a) {
    const auto& lit = kPhaseLiterals[a];
    t.phases_[a].altitude_m = lit.altitude;
    for (int p = 0; p < kTablePhases; ++p) {
      t.phases_[a].power_kw[p] = TableCell::parse(lit.power[p]);
      t.phases_[a].duration_s[p] = TableCell::parse(lit.duration[p]);
    }
    t.winds_[a].altitude_m = lit.altitude;
    for (int w = 0; w < 6; ++w) {
      const auto& wl = kWindLiterals[a][w];
      auto& row = t.winds_[a].rows[w];
      row.wind_kts = wl.wind;
      row.airspeed = TableCell::parse(wl.airspeed);
      row.power_kw = TableCell::parse(wl.power);
      row.duration_s = TableCell::parse(wl.duration);
    }
  }
  if (path.empty()) return t;

  std::ifstream in(path);
  if (!in) throw TableError("cannot open table override " + path.string());
  const auto rows = csv::read(in);
  if (rows.empty()) throw TableError("table override is empty");
  const auto& header = rows.front();
  const std::vector<std::string> expected{"altitude", "phase_or_wind", "power_kw", "duration_s",
                                          "airspeed_ms"};
  if (header != expected) throw TableError("table override header must be " + csv::join(expected));

  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != 5) throw TableError("table override row " + std::to_string(r) + " needs 5 fields");
    const int a = altitude_index(static_cast<int>(TableCell::parse(row[0]).value));
    const std::string key = trim(row[1]);
    const int phase = phase_from_name(key);
    if (phase >= 0) {
      if (!trim(row[2]).empty()) t.phases_[a].power_kw[phase] = TableCell::parse(row[2]);
      if (!trim(row[3]).empty()) t.phases_[a].duration_s[phase] = TableCell::parse(row[3]);
      continue;
    }
    const int w = wind_index(static_cast<int>(TableCell::parse(key).value));
    auto& wr = t.winds_[a].rows[w];
    if (!trim(row[2]).empty()) wr.power_kw = TableCell::parse(row[2]);
    if (!trim(row[3]).empty()) wr.duration_s = TableCell::parse(row[3]);
    if (!trim(row[4]).empty()) wr.airspeed = TableCell::parse(row[4]);
  }
  return t;
}

const PhaseRow& FlightTables::phase_row(int altitude_m) const {
  return phases_[altitude_index(altitude_m)];
}

const WindRow& FlightTables::wind_row(int altitude_m, int wind_kts) const {
  return winds_[altitude_index(altitude_m)].rows[wind_index(wind_kts)];
}

double FlightTables::phase_power_kw(int altitude_m, TablePhase phase) const {
  return phase_row(altitude_m).power_kw[static_cast<int>(phase)].value;
}

double FlightTables::phase_duration_s(int altitude_m, TablePhase phase) const {
  return phase_row(altitude_m).duration_s[static_cast<int>(phase)].value;
}

}  // namespace evtol::flight
