#pragma once

// Emergency-team management scenario: case analyser (ca), medical ontology
// (mo), task planner (tp), ambulance manager (am) and navigation (na).
// Locations are cells p(X,Y) of a 10x10 grid.

#include <set>
#include <string>
#include <vector>

#include "amcs/engine.hpp"
#include "amcs/spec_io.hpp"

namespace amcs::caet {

inline constexpr int kGridSize = 10;
inline constexpr int kMinutesPerCell = 2;
inline constexpr int kCongestionFactor = 2;

struct Cell {
  int x = 0;
  int y = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

/// Throws std::invalid_argument for anything but p(X,Y) inside the grid.
Cell parse_location(const Term& t);
Term location_term(Cell c);

/// Minutes along the cheapest shortest (Manhattan) path. Entering a cell
/// costs kMinutesPerCell, times kCongestionFactor when `traffic` holds
/// congested(cell).
int nav_eta(const Term& from, const Term& to, const std::set<Info>& traffic);

/// Suite "nav", semantics "eta": the facts plus eta(C,A,V) for every
/// queryc(C,LC) and querya(A,LA) with V = nav_eta(LA, LC, congestion).
SuitePtr nav_suite();

/// Bundled system description and sensor script.
const std::string& system_text();
const std::string& sensor_text();

LoadedSystem build_caet();
std::vector<SensorEvent> bundled_sensors(const LoadedSystem& sys);

inline constexpr Tick kGoldenHorizon = 200;
inline constexpr std::uint64_t kGoldenSeed = 7;
inline constexpr std::string_view kGoldenLatency = "fixed:2";

/// Behavioural checks; returns one message per failed check.
///  - every case called in on er_employee_in gets exactly one ambulance_out
///    package carrying assigned(_,C);
///  - no tp belief set holds two assign (or sugassignment) atoms for one
///    ambulance;
///  - a dispatcher assignment that overrides the suggestions is reflected in
///    the next tp computation: no suggestion for that ambulance or case.
std::vector<std::string> check_behaviour(const RunTrace& trace,
                                         const std::vector<SensorEvent>& sensors);

}  // namespace amcs::caet
