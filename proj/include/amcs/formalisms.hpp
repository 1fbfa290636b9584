#pragma once

// Concrete logic suites: fact stores, stratified rule programs evaluated by
// forward chaining, and programs with choice groups that yield several belief
// sets. Also the library of computation controllers and context update
// functions used by scenario files.

#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "amcs/kernel.hpp"

namespace amcs {

class ProgramError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// `head :- pos..., not neg...`. Positive literals may use the builtins
/// lt/2, le/2 and neq/2 (integers compare numerically, other terms in
/// canonical order).
struct Rule {
  Term head;
  std::vector<Term> pos;
  std::vector<Term> neg;
  friend bool operator==(const Rule&, const Rule&) = default;
};

/// Facts, rules and choice groups. A fact store has neither rules nor
/// choices; a rule program has no choices.
class Program final : public KbPayload {
 public:
  std::set<Info> facts;
  std::vector<Rule> rules;
  /// One alternative is selected from each group.
  std::vector<std::vector<Info>> choices;

  std::string render() const override;
  bool equals(const KbPayload& other) const override;
  friend bool operator==(const Program& a, const Program& b) {
    return a.facts == b.facts && a.rules == b.rules && a.choices == b.choices;
  }
};

using FactKB = Program;
using RuleKB = Program;
using ChoiceKB = Program;

Rule parse_rule(std::string_view text);
std::string render_rule(const Rule& r);

/// One statement per line: `fact.`, `head :- body.`, `choice {a; b}.`;
/// lines starting with `%` are comments. Checks safety and stratification.
Program parse_program(std::string_view text);

/// Throws ProgramError when a rule is unsafe or negation is not stratified.
void check_program(const Program& p);
bool is_stratified(const Program& p);
bool is_builtin(const Term& literal);

/// Exactly one belief set: the facts.
std::vector<BeliefSet> factstore_semantics(const Program& kb);
/// The perfect model of a stratified program (choices ignored).
BeliefSet perfect_model(const Program& kb);
/// Single-element sequence holding perfect_model(kb).
std::vector<BeliefSet> forward_chain(const Program& kb);
/// One belief set per element of the cross product of choice groups, in
/// lexicographic order of alternative indices, duplicates dropped.
std::vector<BeliefSet> enumerate_choices(const Program& kb);

// --- suites -------------------------------------------------------------------

inline constexpr std::string_view kFactSuite = "facts";
inline constexpr std::string_view kRuleSuite = "rules";
inline constexpr std::string_view kChoiceSuite = "choice";

KnowledgeBase make_kb(std::string_view formalism, Program p);
const Program& program_of(const KnowledgeBase& kb);

/// semantics: "identity"
SuitePtr fact_suite();
/// semantics: "perfect"
SuitePtr rule_suite();
/// semantics: "all" (every choice combination), "first" (first only)
SuitePtr choice_suite();

// --- controllers ---------------------------------------------------------------

/// Drops incoming infos matching `pattern` when `condition` (sharing its
/// variables) matches a fact of the kb or another incoming info.
struct IgnoreFilter {
  Term pattern;
  Term condition;
};

struct ControllerPolicy {
  enum class Kind { Always, WaitForSources, WaitForEoc, NonemptyBuffer, NovelInfo };
  Kind kind = Kind::Always;
  std::set<Name> sources;
  /// Applied before the novelty test of NovelInfo.
  std::vector<IgnoreFilter> ignore;
};

/// `always`, `nonempty_buffer`, `novel_info`, `wait_for_sources(a,b)`,
/// `wait_for_eoc(a)`.
ControllerPolicy parse_controller_policy(std::string_view text);
std::string render_controller_policy(const ControllerPolicy& p);
Controller make_controller(ControllerPolicy policy);

// --- updaters ---------------------------------------------------------------

/// Deletes kb facts matching `retract`. With a trigger, the deletion fires
/// once per incoming info matching the trigger, with shared variables bound.
struct ForgetFilter {
  Term retract;
  std::optional<Term> trigger;
};

struct UpdatePolicy {
  std::vector<ForgetFilter> forget;
  std::vector<IgnoreFilter> ignore;
  /// Consume at most this many packages; the rest stays buffered.
  std::optional<std::size_t> max_packages;
};

ForgetFilter parse_forget(std::string_view text);
IgnoreFilter parse_ignore(std::string_view text);
std::string render_forget(const ForgetFilter& f);
std::string render_ignore(const IgnoreFilter& f);

/// Incoming infos of `pkgs` after dropping eoc and ignored infos.
std::vector<Info> incoming_infos(std::span<const DataPackage> pkgs, const Program& kb,
                                 const std::vector<IgnoreFilter>& ignore);

/// Consumes the buffer (or its first max_packages packages), applies forget
/// filters to the old facts and adds every non-eoc info. Semantics,
/// controller and rules are carried over from `current`.
ContextConfiguration updater_append_facts(const InformationBuffer& ib, const KnowledgeBase& kb,
                                          const ContextConfiguration& current,
                                          const UpdatePolicy& policy);
Updater make_append_updater(UpdatePolicy policy);

}  // namespace amcs
