#pragma once

// Checks a recorded run against the run conditions using only the snapshots
// and the notification log. Shares no code with the engine's scheduling.

#include <vector>

#include "amcs/engine.hpp"

namespace amcs {

/// Violations ordered by time, then condition, then location. Controllers
/// and update functions recorded in the snapshots (in-process traces) are
/// re-evaluated; parsed traces are checked on their recorded flags.
/// Throws std::invalid_argument when the trace is malformed (shape mismatch
/// or non-consecutive times).
std::vector<Violation> validate_run(const AMCSSpec& spec, const RunTrace& trace);
inline std::vector<Violation> validate_run(const RunTrace& trace) {
  return validate_run(trace.spec, trace);
}

}  // namespace amcs
