#pragma once

// System description files (.amcs) and sensor event files.
//
//   stream dispatcher_out
//   sensor traffic -> na
//   context tp rules perfect
//     controller novel_info
//     consume 1
//     forget avail(A,_) on assign(A,_).
//     ignore class(C,_) if manual_priority(C,_).
//     out dispatcher_out: assign(A,C) :- sugassignment(A,C).
//     kb {
//       ...
//     }
//
// Sensor files hold one event per line: `t=<tick> sensor=<name> info=<terms>`.

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "amcs/engine.hpp"
#include "amcs/trace_io.hpp"

namespace amcs {

class LoadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LoadedSystem {
  AMCSSpec spec;
  SystemConfiguration init;
  /// Context each sensor feeds.
  std::map<Name, Name> sensor_targets;
};

LoadedSystem parse_system(std::string_view text, const SuiteResolver& suites);
LoadedSystem load_system(const std::string& path, const SuiteResolver& suites);

std::vector<SensorEvent> parse_sensor_events(std::string_view text, const LoadedSystem& sys);
std::vector<SensorEvent> load_sensor_events(const std::string& path, const LoadedSystem& sys);
std::string render_sensor_event(const SensorEvent& e);

std::string read_file(const std::string& path);

}  // namespace amcs
