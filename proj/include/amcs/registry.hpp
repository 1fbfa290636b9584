#pragma once

#include <string_view>

#include "amcs/trace_io.hpp"

namespace amcs {

/// facts, rules, choice, nav, rmcs_check; nullptr for unknown tags.
SuitePtr builtin_suite(std::string_view tag);
SuiteResolver builtin_suites();

}  // namespace amcs
