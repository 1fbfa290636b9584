#include "amcs/registry.hpp"

#include "amcs/caet.hpp"
#include "amcs/formalisms.hpp"
#include "amcs/rmcs.hpp"

namespace amcs {

SuitePtr builtin_suite(std::string_view tag) {
  if (tag == kFactSuite) return fact_suite();
  if (tag == kRuleSuite) return rule_suite();
  if (tag == kChoiceSuite) return choice_suite();
  if (tag == "nav") return caet::nav_suite();
  if (tag == "rmcs_check") return rmcs_check_suite();
  return nullptr;
}

SuiteResolver builtin_suites() { return [](std::string_view tag) { return builtin_suite(tag); }; }

}  // namespace amcs
