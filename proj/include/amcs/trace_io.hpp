#pragma once

// Line-oriented trace format. Notification records look like
//   t=3 kind=beliefSet src=tp dst=na pkg=[querya(a1,p(1,1))]
// and precede the snapshot block of their tick. Snapshot blocks list every
// context with its flags; the kb and rules are written only when they change,
// buffers as deltas (`drop=D` removes from the front, `+` lines append).

#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>

#include "amcs/engine.hpp"

namespace amcs {

class TraceFormatError : public std::runtime_error {
 public:
  TraceFormatError(std::size_t line, const std::string& msg)
      : std::runtime_error("trace line " + std::to_string(line) + ": " + msg), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

using SuiteResolver = std::function<SuitePtr(std::string_view tag)>;

std::string render_notification(const Notification& n);
Notification parse_notification(std::string_view line);

/// Full format, bit-exact for golden comparisons.
void write_trace(std::ostream& out, const RunTrace& trace);
std::string trace_to_string(const RunTrace& trace);
/// Notification records and the fault line only.
void write_log(std::ostream& out, const RunTrace& trace);

/// Inverse of write_trace. Controllers and updaters are left empty.
RunTrace parse_trace(std::string_view text, const SuiteResolver& suites);

}  // namespace amcs
