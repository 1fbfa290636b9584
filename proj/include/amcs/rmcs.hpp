#pragma once

// Reactive multi-context systems: a small propositional variant, a
// brute-force equilibrium enumerator and its simulation as an aMCS.
//
// Text format:
//
//   sensor s
//   context c1
//   kb:
//     a.
//     b :- a, not c.
//   bridge:
//     d :- (c2:a), not (s:x).
//
// Bridge literals name a context (by name or 1-based index) or a sensor.
// Every context uses the stratified rule semantics; its management adds the
// heads of the active bridge rules to the kb.

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "amcs/engine.hpp"
#include "amcs/formalisms.hpp"

namespace amcs {

class RmcsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UniverseTooLarge : public RmcsError {
 public:
  using RmcsError::RmcsError;
};

inline constexpr std::size_t kMaxUniverse = 12;

struct BridgeLiteral {
  bool negated = false;
  /// 0-based context index, or -1 for a sensor literal.
  int context = -1;
  Name sensor;
  Info atom;
  friend bool operator==(const BridgeLiteral&, const BridgeLiteral&) = default;
};

struct BridgeRule {
  Info head;
  std::vector<BridgeLiteral> body;
  friend bool operator==(const BridgeRule&, const BridgeRule&) = default;
};

struct RmcsContext {
  Name name;
  RuleKB kb;
  std::vector<BridgeRule> bridge;
};

struct SimpleRMCS {
  std::vector<RmcsContext> contexts;
  std::vector<Name> sensors;
};

/// One belief set per context.
using EquilibriumCandidate = std::vector<BeliefSet>;
/// Current reading of each sensor; missing sensors read nothing.
using Observation = std::map<Name, std::set<Info>>;

/// Throws RmcsError on syntax errors, bad references, non-ground bridge rules
/// or kbs with choice groups.
SimpleRMCS parse_rmcs(std::string_view text);
SimpleRMCS load_rmcs(const std::string& path);
std::string render_rmcs(const SimpleRMCS& m);
void check_rmcs(const SimpleRMCS& m);

/// Heads of the bridge rules of context i that hold under `s`.
std::set<Info> active_heads(const SimpleRMCS& m, std::size_t i, const EquilibriumCandidate& s,
                            const Observation& obs);

/// Belief sets context i can have: the semantics of its kb extended by every
/// subset of its bridge heads. Sorted, without duplicates.
std::vector<BeliefSet> candidate_belief_sets(const SimpleRMCS& m, std::size_t i);

/// Throws UniverseTooLarge when the contexts together can believe more than
/// kMaxUniverse atoms.
std::set<EquilibriumCandidate> brute_force_equilibria(const SimpleRMCS& m,
                                                      const Observation& obs = {});

std::string render_candidate(const EquilibriumCandidate& c);

// --- simulation -----------------------------------------------------------------

inline constexpr std::string_view kEquilibriaStream = "equilibria";

/// Contexts kb_<c>, kbp_<c>, m_<c> per rMCS context c (in that order), then
/// obs, guess and check. `initial` is placed in the input buffer of obs and
/// drives the first round; later sensor packages sent to obs are released
/// one round at a time, each after check reported success.
struct Simulation {
  AMCSSpec spec;
  SystemConfiguration init;
  /// Candidates guess enumerates per round.
  std::size_t candidates = 0;
};

/// Throws SpecError when the generated system does not validate (for
/// instance when a sensor name clashes with a generated context).
Simulation build_simulation(const SimpleRMCS& m, const Observation& initial = {});

/// Horizon after which `rounds` rounds have completed when every belief set
/// and end-of-computation marker takes at most `max_latency` ticks.
Tick simulation_horizon(const Simulation& sim, Tick max_latency, int rounds = 1);

/// Number of rMCS contexts a simulation spec was built from.
std::size_t simulated_contexts(const AMCSSpec& spec);

/// Decodes the equilibria stream of the last snapshot. Throws RmcsError on a
/// malformed package.
std::set<EquilibriumCandidate> extract_equilibria(const RunTrace& trace);

/// Suite "rmcs_check", semantics "confirm": one belief set per confirmed
/// candidate of the latest round, or a single retry(N) belief set.
SuitePtr rmcs_check_suite();

}  // namespace amcs
