#pragma once

// Discrete-time run engine. One step advances the global tick by one:
// computations end and start, scheduled belief-set and end-of-computation
// notifications are delivered, sensor packages arrive, and waiting flags are
// re-evaluated.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "amcs/kernel.hpp"

namespace amcs {

using Tick = long long;

/// Deterministic across platforms: draws are reduced by plain modulo rather
/// than through std::uniform_int_distribution.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : eng_(seed) {}
  std::uint64_t next() { return eng_(); }
  /// Uniform-ish integer in [lo, hi].
  long long between(long long lo, long long hi);
  bool chance(unsigned percent) { return next() % 100 < percent; }

 private:
  std::mt19937_64 eng_;
};

struct SensorEvent {
  Tick time = 0;
  Name target;
  /// Source is the sensor name.
  DataPackage package;
};

/// Offsets relative to the start tick of a computation.
struct LatencySchedule {
  std::vector<Tick> deliveries;
  Tick eoc = 1;
};

class LatencyModel {
 public:
  using Sampler = std::function<LatencySchedule(int context, const KnowledgeBase& kb,
                                                std::size_t count, Rng& rng)>;

  /// `max_gap` bounds every gap between consecutive deliveries and the eoc;
  /// 0 means unknown.
  LatencyModel(std::string description, Sampler sampler, Tick max_gap = 0)
      : description_(std::move(description)), sampler_(std::move(sampler)), max_gap_(max_gap) {}

  /// Belief set j is delivered k*(j+1) ticks after start, eoc k*(count+1).
  static LatencyModel fixed(Tick k);
  /// Each gap (between consecutive deliveries and before eoc) drawn from [a,b].
  static LatencyModel uniform(Tick a, Tick b);
  /// fixed:k with k looked up per context index; missing entries use 1.
  static LatencyModel table(std::vector<Tick> per_context, std::string description);
  /// `fixed:k`, `uniform:a..b`, `table:path` (lines `<context> <k>`).
  static LatencyModel parse(std::string_view text, const AMCSSpec& spec);

  LatencySchedule sample(int context, const KnowledgeBase& kb, std::size_t count,
                         Rng& rng) const {
    return sampler_(context, kb, count, rng);
  }
  const std::string& description() const { return description_; }
  Tick max_gap() const { return max_gap_; }

 private:
  std::string description_;
  Sampler sampler_;
  Tick max_gap_;
};

struct InFlightComputation {
  int context = -1;
  Tick started = 0;
  KnowledgeBase kb;
  std::string semantics;
  /// (belief set, delivery tick), deliveries nondecreasing.
  std::vector<std::pair<BeliefSet, Tick>> pending;
  std::size_t delivered = 0;
  Tick eoc = 0;
};

struct RuntimeState {
  Tick time = 0;
  SystemConfiguration config;
  std::vector<bool> busy;
  std::vector<bool> waiting;
  std::vector<std::optional<InFlightComputation>> inflight;

  // Last (kb, buffer) the controller was consulted for, per context.
  struct WaitCache {
    KnowledgeBase kb;
    InformationBuffer buffer;
    bool valid = false;
  };
  std::vector<WaitCache> wait_cache;
};

struct Notification {
  enum class Kind { BeliefSet, Eoc, Sensor, Update };
  Tick time = 0;
  Kind kind = Kind::BeliefSet;
  Name src;
  Name dst;
  DataPackage package;

  friend bool operator==(const Notification&, const Notification&) = default;
};

std::string_view kind_name(Notification::Kind k);
std::optional<Notification::Kind> parse_kind(std::string_view s);

/// Raised when a run cannot continue: controller or updater exceptions,
/// non-suffix buffers, inadmissible knowledge bases, bad latency samples.
class EngineFault : public std::runtime_error {
 public:
  EngineFault(Name context, std::optional<Condition> condition, const std::string& msg)
      : std::runtime_error(msg), context_(std::move(context)), condition_(condition) {}
  const Name& context() const { return context_; }
  std::optional<Condition> condition() const { return condition_; }

 private:
  Name context_;
  std::optional<Condition> condition_;
};

/// Raised by run() when validate_system rejects the input.
class SpecError : public std::runtime_error {
 public:
  explicit SpecError(std::vector<Violation> v);
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

/// True iff the controller rejects (kb, buffer). Controller exceptions become
/// an EngineFault naming `context`.
bool is_waiting(const ContextConfiguration& cfg, const Name& context = {});

RuntimeState initial_state(const AMCSSpec& spec, SystemConfiguration init);

/// Starts a computation of context `i` that is busy from state.time+1: the
/// configuration is replaced by the updater's result, the belief sets of the
/// new kb are computed and scheduled. Does not advance time.
void begin_computation(const AMCSSpec& spec, RuntimeState& state, int i,
                       const LatencyModel& latency, Rng& rng,
                       std::vector<Notification>* log = nullptr);

/// Advances state by one tick. `events` must all be timestamped time+1.
RuntimeState step(const AMCSSpec& spec, RuntimeState state, std::span<const SensorEvent> events,
                  const LatencyModel& latency, Rng& rng, std::vector<Notification>* log = nullptr);

// --- traces --------------------------------------------------------------------------

struct ContextSnapshot {
  KnowledgeBase kb;
  std::string semantics;
  InformationBuffer buffer;
  RuleSet rules;
  bool busy = false;
  bool waiting = false;
  /// Available for traces produced in-process; absent after parsing.
  Controller controller;
  Updater updater;

  std::span<const OutputRule> rule_span() const {
    return rules ? std::span<const OutputRule>(*rules) : std::span<const OutputRule>();
  }
};

struct Snapshot {
  Tick time = 0;
  std::vector<ContextSnapshot> contexts;
  std::vector<InformationBuffer> streams;
};

struct RunFault {
  Tick time = 0;
  Name context;
  std::optional<Condition> condition;
  std::string message;
};

struct RunTrace {
  AMCSSpec spec;
  std::vector<Snapshot> snapshots;
  /// Ordered by time; entries of tick t precede snapshot t.
  std::vector<Notification> log;
  std::optional<RunFault> fault;
};

Snapshot take_snapshot(const RuntimeState& state);

/// Iterates step() `horizon` times from init. Events before t=1 are rejected,
/// events after the horizon ignored; events of one tick apply in list order.
/// Step faults end the trace early and are recorded in RunTrace::fault.
RunTrace run(const AMCSSpec& spec, const SystemConfiguration& init,
             std::span<const SensorEvent> sensors, Tick horizon, const LatencyModel& latency,
             std::uint64_t seed);

}  // namespace amcs
