#include "amcs/engine.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace amcs {

long long Rng::between(long long lo, long long hi) {
  if (hi <= lo) return lo;
  auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<long long>(next() % span);
}

// --- latency ----------------------------------------------------------------

LatencyModel LatencyModel::fixed(Tick k) {
  if (k < 1) throw std::invalid_argument("fixed latency must be at least 1");
  return LatencyModel("fixed:" + std::to_string(k),
                      [k](int, const KnowledgeBase&, std::size_t count, Rng&) {
                        LatencySchedule s;
                        for (std::size_t j = 0; j < count; ++j)
                          s.deliveries.push_back(k * static_cast<Tick>(j + 1));
                        s.eoc = k * static_cast<Tick>(count + 1);
                        return s;
                      },
                      k);
}

LatencyModel LatencyModel::uniform(Tick a, Tick b) {
  if (a < 1 || b < a) throw std::invalid_argument("uniform latency needs 1 <= a <= b");
  return LatencyModel("uniform:" + std::to_string(a) + ".." + std::to_string(b),
                      [a, b](int, const KnowledgeBase&, std::size_t count, Rng& rng) {
                        LatencySchedule s;
                        Tick cur = 0;
                        for (std::size_t j = 0; j < count; ++j) {
                          cur += rng.between(a, b);
                          s.deliveries.push_back(cur);
                        }
                        s.eoc = cur + rng.between(a, b);
                        return s;
                      },
                      b);
}

LatencyModel LatencyModel::table(std::vector<Tick> per_context, std::string description) {
  for (Tick k : per_context)
    if (k < 1) throw std::invalid_argument("table latency entries must be at least 1");
  Tick max_gap = 1;
  for (Tick k : per_context) max_gap = std::max(max_gap, k);
  return LatencyModel(std::move(description),
                      [per_context = std::move(per_context)](int ctx, const KnowledgeBase&,
                                                             std::size_t count, Rng&) {
                        Tick k = ctx >= 0 && static_cast<std::size_t>(ctx) < per_context.size()
                                     ? per_context[ctx]
                                     : 1;
                        LatencySchedule s;
                        for (std::size_t j = 0; j < count; ++j)
                          s.deliveries.push_back(k * static_cast<Tick>(j + 1));
                        s.eoc = k * static_cast<Tick>(count + 1);
                        return s;
                      },
                      max_gap);
}

namespace {

Tick parse_tick(std::string_view s, std::string_view what) {
  s = trim(s);
  Tick v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw std::invalid_argument("bad " + std::string(what) + " '" + std::string(s) + "'");
  return v;
}

}  // namespace

LatencyModel LatencyModel::parse(std::string_view text, const AMCSSpec& spec) {
  auto colon = text.find(':');
  if (colon == std::string_view::npos)
    throw std::invalid_argument("latency must be fixed:k, uniform:a..b or table:path");
  std::string_view kind = text.substr(0, colon), arg = text.substr(colon + 1);
  if (kind == "fixed") return fixed(parse_tick(arg, "latency"));
  if (kind == "uniform") {
    auto dots = arg.find("..");
    if (dots == std::string_view::npos) throw std::invalid_argument("uniform latency needs a..b");
    return uniform(parse_tick(arg.substr(0, dots), "latency"),
                   parse_tick(arg.substr(dots + 2), "latency"));
  }
  if (kind == "table") {
    std::ifstream in{std::string(arg)};
    if (!in) throw std::invalid_argument("cannot open latency table '" + std::string(arg) + "'");
    std::vector<Tick> per(spec.contexts.size(), 1);
    std::string line;
    while (std::getline(in, line)) {
      std::string_view l = trim(line);
      if (l.empty() || l.front() == '#') continue;
      auto sp = l.find_first_of(" \t");
      if (sp == std::string_view::npos) throw std::invalid_argument("latency table line '" + line + "'");
      int idx = spec.context_index(trim(l.substr(0, sp)));
      if (idx < 0) throw std::invalid_argument("latency table names unknown context in '" + line + "'");
      per[idx] = parse_tick(l.substr(sp + 1), "latency");
    }
    return table(std::move(per), std::string(text));
  }
  throw std::invalid_argument("unknown latency model '" + std::string(kind) + "'");
}

// --- notifications -------------------------------------------------------------

std::string_view kind_name(Notification::Kind k) {
  switch (k) {
    case Notification::Kind::BeliefSet: return "beliefSet";
    case Notification::Kind::Eoc: return "eoc";
    case Notification::Kind::Sensor: return "sensor";
    case Notification::Kind::Update: return "update";
  }
  return "?";
}

std::optional<Notification::Kind> parse_kind(std::string_view s) {
  if (s == "beliefSet") return Notification::Kind::BeliefSet;
  if (s == "eoc") return Notification::Kind::Eoc;
  if (s == "sensor") return Notification::Kind::Sensor;
  if (s == "update") return Notification::Kind::Update;
  return std::nullopt;
}

SpecError::SpecError(std::vector<Violation> v)
    : std::runtime_error([&] {
        std::string msg = "invalid system:";
        for (const Violation& x : v) msg += "\n  " + render_violation(x);
        return msg;
      }()),
      violations_(std::move(v)) {}

// --- engine ------------------------------------------------------------------------

bool is_waiting(const ContextConfiguration& cfg, const Name& context) {
  if (!cfg.management.controller)
    throw EngineFault(context, std::nullopt, "context '" + context + "' has no controller");
  try {
    return !cfg.management.controller(cfg.kb, cfg.buffer);
  } catch (const EngineFault&) {
    throw;
  } catch (const std::exception& e) {
    throw EngineFault(context, std::nullopt,
                      "controller of context '" + context + "' failed: " + e.what());
  }
}

namespace {

void refresh_waiting(const AMCSSpec& spec, RuntimeState& state) {
  for (std::size_t i = 0; i < state.config.contexts.size(); ++i) {
    const ContextConfiguration& cfg = state.config.contexts[i];
    auto& cache = state.wait_cache[i];
    if (cache.valid && cache.kb.same_object(cfg.kb) && cache.buffer.identical(cfg.buffer)) continue;
    state.waiting[i] = is_waiting(cfg, spec.contexts[i].name);
    cache = {cfg.kb, cfg.buffer, true};
  }
}

void append_to(const AMCSSpec& spec, RuntimeState& state, const Name& dst, DataPackage pkg) {
  if (int c = spec.context_index(dst); c >= 0) {
    state.config.contexts[c].buffer.append(std::move(pkg));
    return;
  }
  if (int s = spec.stream_index(dst); s >= 0) {
    state.config.streams[s].append(std::move(pkg));
    return;
  }
  throw EngineFault(pkg.source, Condition::Def5, "unknown stakeholder '" + dst + "'");
}

void notify(const AMCSSpec& spec, RuntimeState& state, int i, Notification::Kind kind,
            const BeliefSet* bs, std::vector<Notification>* log) {
  const Name& name = spec.contexts[i].name;
  auto rules = state.config.contexts[i].rules();
  for (const Name& st : stakeholders(rules)) {
    DataPackage pkg = bs ? relout(name, *bs, rules, st)
                         : DataPackage(name, std::vector<Info>{eoc_atom()});
    if (log) log->push_back({state.time + 1, kind, name, st, pkg});
    append_to(spec, state, st, std::move(pkg));
  }
}

}  // namespace

RuntimeState initial_state(const AMCSSpec& spec, SystemConfiguration init) {
  RuntimeState s;
  std::size_t n = spec.contexts.size();
  if (init.contexts.size() != n || init.streams.size() != spec.output_streams.size())
    throw std::invalid_argument("configuration does not match the system shape");
  s.config = std::move(init);
  s.busy.assign(n, false);
  s.waiting.assign(n, false);
  s.inflight.assign(n, std::nullopt);
  s.wait_cache.assign(n, {});
  refresh_waiting(spec, s);
  return s;
}

void begin_computation(const AMCSSpec& spec, RuntimeState& state, int i,
                       const LatencyModel& latency, Rng& rng, std::vector<Notification>* log) {
  const Name& name = spec.contexts[i].name;
  ContextConfiguration& cfg = state.config.contexts[i];
  auto fault = [&](std::optional<Condition> c, const std::string& msg) {
    return EngineFault(name, c, "context '" + name + "': " + msg);
  };
  if (!cfg.management.updater) throw fault(std::nullopt, "no context update function");

  ContextConfiguration next;
  try {
    next = cfg.management.updater(cfg.buffer, cfg.kb, cfg);
  } catch (const EngineFault&) {
    throw;
  } catch (const std::exception& e) {
    throw fault(std::nullopt, std::string("update function failed: ") + e.what());
  }
  if (!next.buffer.is_suffix_of(cfg.buffer))
    throw fault(Condition::Suffix, "updated input buffer is not a suffix of the old one");
  if (!next.management.controller || !next.management.updater)
    throw fault(Condition::Def5, "updated management lacks a controller or update function");

  const LogicSuite& suite = *spec.contexts[i].suite;
  if (next.kb.formalism() != suite.tag || !suite.admissible(next.kb))
    throw fault(Condition::Def5, "updated knowledge base is not admissible");
  const Semantics* sem = suite.find(next.semantics);
  if (!sem) throw fault(Condition::Def5, "unknown semantics '" + next.semantics + "'");
  for (const OutputRule& r : next.rules()) {
    if (!spec.in_names(r.stakeholder))
      throw fault(Condition::Def5, "unknown stakeholder '" + r.stakeholder + "'");
    if (is_eoc(r.head)) throw fault(Condition::Def5, "output rule head is eoc");
  }

  std::vector<BeliefSet> acc;
  try {
    acc = sem->evaluate(next.kb);
  } catch (const std::exception& e) {
    throw fault(std::nullopt, std::string("semantics failed: ") + e.what());
  }

  InFlightComputation comp;
  comp.context = i;
  comp.started = state.time + 1;
  comp.kb = next.kb;
  comp.semantics = next.semantics;
  if (stakeholders(next.rules()).empty()) {
    // Nobody to notify: the computation ends at its start tick.
    for (BeliefSet& bs : acc) comp.pending.emplace_back(std::move(bs), comp.started);
    comp.delivered = comp.pending.size();
    comp.eoc = comp.started;
  } else {
    LatencySchedule sched = latency.sample(i, next.kb, acc.size(), rng);
    if (sched.deliveries.size() != acc.size())
      throw fault(std::nullopt, "latency model returned a schedule of the wrong length");
    Tick prev = 1;
    for (Tick d : sched.deliveries) {
      if (d < prev) throw fault(std::nullopt, "latency offsets must be >= 1 and nondecreasing");
      prev = d;
    }
    if (sched.eoc < prev) throw fault(std::nullopt, "eoc offset precedes a delivery");
    for (std::size_t j = 0; j < acc.size(); ++j)
      comp.pending.emplace_back(std::move(acc[j]), comp.started + sched.deliveries[j]);
    comp.eoc = comp.started + sched.eoc;
  }

  std::size_t consumed = cfg.buffer.size() - next.buffer.size();
  if (log) {
    Info c = Term::compound("consumed", {Term::symbol(std::to_string(consumed))});
    log->push_back({comp.started, Notification::Kind::Update, name, name,
                    DataPackage(name, std::vector<Info>{c})});
  }
  cfg = std::move(next);
  state.busy[i] = true;
  state.inflight[i] = std::move(comp);
}

RuntimeState step(const AMCSSpec& spec, RuntimeState state, std::span<const SensorEvent> events,
                  const LatencyModel& latency, Rng& rng, std::vector<Notification>* log) {
  const Tick now = state.time;
  const Tick next = now + 1;
  for (const SensorEvent& e : events)
    if (e.time != next)
      throw std::invalid_argument("sensor event at t=" + std::to_string(e.time) +
                                  " passed to step at t=" + std::to_string(next));
  const int n = static_cast<int>(spec.contexts.size());

  for (int i = 0; i < n; ++i) {
    auto& comp = state.inflight[i];
    if (comp && comp->eoc <= now) {
      comp.reset();
      state.busy[i] = false;
    } else if (!state.busy[i] && !state.waiting[i]) {
      begin_computation(spec, state, i, latency, rng, log);
    }
  }

  for (int i = 0; i < n; ++i) {
    auto& comp = state.inflight[i];
    if (!comp) continue;
    while (comp->delivered < comp->pending.size() && comp->pending[comp->delivered].second == next) {
      notify(spec, state, i, Notification::Kind::BeliefSet, &comp->pending[comp->delivered].first, log);
      ++comp->delivered;
    }
    if (comp->eoc == next && comp->started != next)
      notify(spec, state, i, Notification::Kind::Eoc, nullptr, log);
  }

  for (const SensorEvent& e : events) {
    int c = spec.context_index(e.target);
    if (c < 0)
      throw EngineFault(e.target, std::nullopt,
                        "sensor event targets unknown context '" + e.target + "'");
    if (!spec.is_sensor(e.package.source))
      throw EngineFault(e.target, Condition::V,
                        "sensor event source '" + e.package.source + "' is not a sensor");
    if (log) log->push_back({next, Notification::Kind::Sensor, e.package.source, e.target, e.package});
    state.config.contexts[c].buffer.append(e.package);
  }

  state.time = next;
  refresh_waiting(spec, state);
  return state;
}

Snapshot take_snapshot(const RuntimeState& state) {
  Snapshot s;
  s.time = state.time;
  s.contexts.reserve(state.config.contexts.size());
  for (std::size_t i = 0; i < state.config.contexts.size(); ++i) {
    const ContextConfiguration& c = state.config.contexts[i];
    s.contexts.push_back({c.kb, c.semantics, c.buffer, c.management.rules, bool(state.busy[i]),
                          bool(state.waiting[i]), c.management.controller, c.management.updater});
  }
  s.streams = state.config.streams;
  return s;
}

RunTrace run(const AMCSSpec& spec, const SystemConfiguration& init,
             std::span<const SensorEvent> sensors, Tick horizon, const LatencyModel& latency,
             std::uint64_t seed) {
  if (horizon < 0) throw std::invalid_argument("horizon must be >= 0");
  if (auto v = validate_system(spec, init); !v.empty()) throw SpecError(std::move(v));

  std::map<Tick, std::vector<SensorEvent>> by_time;
  for (const SensorEvent& e : sensors) {
    if (e.time < 1)
      throw std::invalid_argument("sensor event at t=" + std::to_string(e.time) +
                                  "; events start at t=1");
    if (e.time <= horizon) by_time[e.time].push_back(e);
  }

  RunTrace trace;
  trace.spec = spec;
  Rng rng(seed);
  RuntimeState state = initial_state(spec, init);
  trace.snapshots.push_back(take_snapshot(state));
  static const std::vector<SensorEvent> none;
  for (Tick t = 1; t <= horizon; ++t) {
    auto it = by_time.find(t);
    const auto& events = it == by_time.end() ? none : it->second;
    std::size_t log_mark = trace.log.size();
    try {
      state = step(spec, std::move(state), events, latency, rng, &trace.log);
    } catch (const EngineFault& f) {
      trace.log.resize(log_mark);
      trace.fault = RunFault{t, f.context(), f.condition(), f.what()};
      break;
    } catch (const std::exception& e) {
      trace.log.resize(log_mark);
      trace.fault = RunFault{t, {}, std::nullopt, e.what()};
      break;
    }
    trace.snapshots.push_back(take_snapshot(state));
  }
  return trace;
}

}  // namespace amcs
