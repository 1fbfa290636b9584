#include "amcs/validate.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <tuple>

namespace amcs {

namespace {

using Kind = Notification::Kind;

bool same_rules(const RuleSet& a, const RuleSet& b) {
  if (a == b) return true;
  std::span<const OutputRule> x = a ? std::span<const OutputRule>(*a) : std::span<const OutputRule>();
  std::span<const OutputRule> y = b ? std::span<const OutputRule>(*b) : std::span<const OutputRule>();
  return std::equal(x.begin(), x.end(), y.begin(), y.end());
}

std::string tick(Tick t) { return "t=" + std::to_string(t); }

class Validator {
 public:
  Validator(const AMCSSpec& spec, const RunTrace& trace) : spec_(spec), trace_(trace) {}

  std::vector<Violation> run() {
    check_shape();
    index_log();
    check_definition5();
    for (std::size_t i = 0; i < spec_.contexts.size(); ++i) {
      check_input_buffer(static_cast<int>(i));
      check_computations(static_cast<int>(i));
    }
    for (std::size_t j = 0; j < spec_.output_streams.size(); ++j) check_stream(j);
    report_unjustified();
    std::stable_sort(out_.begin(), out_.end(), [](const Violation& a, const Violation& b) {
      return std::tie(a.time, a.condition, a.where) < std::tie(b.time, b.condition, b.where);
    });
    return std::move(out_);
  }

 private:
  void add(Condition c, Tick t, const Name& where, std::string msg) {
    out_.push_back({c, t, where, std::move(msg)});
  }

  const Snapshot& snap(std::size_t t) const { return trace_.snapshots[t]; }
  std::size_t horizon() const { return trace_.snapshots.size() - 1; }

  void check_shape() {
    if (trace_.snapshots.empty()) throw std::invalid_argument("trace has no snapshots");
    for (std::size_t t = 0; t < trace_.snapshots.size(); ++t) {
      const Snapshot& s = snap(t);
      if (s.time != static_cast<Tick>(t))
        throw std::invalid_argument("snapshot times must be 0,1,2,...");
      if (s.contexts.size() != spec_.contexts.size() ||
          s.streams.size() != spec_.output_streams.size())
        throw std::invalid_argument("snapshot " + tick(s.time) + " does not match the system shape");
    }
  }

  void index_log() {
    by_time_.assign(trace_.snapshots.size(), {});
    used_.assign(trace_.log.size(), false);
    for (std::size_t k = 0; k < trace_.log.size(); ++k) {
      const Notification& n = trace_.log[k];
      if (n.time < 1 || n.time > static_cast<Tick>(horizon())) {
        bool to_stream = spec_.stream_index(n.dst) >= 0;
        add(to_stream ? Condition::IV : Condition::V, n.time, n.dst,
            "notification logged outside the trace's time range");
        used_[k] = true;
        continue;
      }
      by_time_[n.time].push_back(k);
    }
  }

  /// Log entries at t with destination dst and one of the accepted kinds,
  /// in log order.
  std::vector<std::size_t> arrivals(std::size_t t, const Name& dst) const {
    std::vector<std::size_t> out;
    for (std::size_t k : by_time_[t]) {
      const Notification& n = trace_.log[k];
      if (n.kind != Kind::Update && n.dst == dst) out.push_back(k);
    }
    return out;
  }

  bool started_at(int i, std::size_t t) const {
    if (t == 0 || t > horizon()) return false;
    for (std::size_t k : by_time_[t]) {
      const Notification& n = trace_.log[k];
      if (n.kind == Kind::Update && n.src == spec_.contexts[i].name) return true;
    }
    return false;
  }

  void check_definition5() {
    for (std::size_t t = 0; t <= horizon(); ++t) {
      for (std::size_t i = 0; i < spec_.contexts.size(); ++i) {
        const RuleSet& rs = snap(t).contexts[i].rules;
        if (t > 0 && same_rules(rs, snap(t - 1).contexts[i].rules)) continue;
        for (const OutputRule& r : snap(t).contexts[i].rule_span()) {
          if (!spec_.in_names(r.stakeholder))
            add(Condition::Def5, snap(t).time, spec_.contexts[i].name,
                "output rule names unknown stakeholder '" + r.stakeholder + "'");
          if (is_eoc(r.head))
            add(Condition::Def5, snap(t).time, spec_.contexts[i].name, "output rule head is eoc");
        }
      }
    }
    for (std::size_t j = 0; j < spec_.output_streams.size(); ++j)
      for (std::size_t p = 0; p < snap(0).streams[j].size(); ++p)
        if (spec_.context_index(snap(0).streams[j][p].source) < 0)
          add(Condition::Def5, 0, spec_.output_streams[j],
              "output stream holds a package from non-context '" + snap(0).streams[j][p].source + "'");
    for (const Notification& n : trace_.log)
      if (n.kind == Kind::Update && spec_.context_index(n.src) < 0)
        add(Condition::I, n.time, n.src, "computation start logged for unknown context");
  }

  ContextConfiguration config_of(const ContextSnapshot& c) const {
    ContextConfiguration cfg;
    cfg.kb = c.kb;
    cfg.semantics = c.semantics;
    cfg.buffer = c.buffer;
    cfg.management = {c.controller, c.updater, c.rules};
    return cfg;
  }

  void check_waiting_flag(int i, std::size_t t) {
    const ContextSnapshot& c = snap(t).contexts[i];
    if (!c.controller) return;
    bool w;
    try {
      w = !c.controller(c.kb, c.buffer);
    } catch (const std::exception& e) {
      add(Condition::I, snap(t).time, spec_.contexts[i].name,
          std::string("controller failed: ") + e.what());
      return;
    }
    if (w != c.waiting)
      add(Condition::I, snap(t).time, spec_.contexts[i].name,
          std::string("recorded waiting flag disagrees with the controller (controller says ") +
              (w ? "waiting" : "not waiting") + ")");
  }

  /// Condition (i) for starts, (v) for append-only growth, and the suffix
  /// rule at computation starts.
  void check_input_buffer(int i) {
    const Name& name = spec_.contexts[i].name;
    check_waiting_flag(i, 0);
    for (std::size_t t = 0; t < horizon(); ++t) {
      const ContextSnapshot& before = snap(t).contexts[i];
      const ContextSnapshot& after = snap(t + 1).contexts[i];
      const Tick u = snap(t + 1).time;
      check_waiting_flag(i, t + 1);
      std::vector<std::size_t> arr = arrivals(t + 1, name);
      for (std::size_t k : arr) {
        const Notification& n = trace_.log[k];
        if (n.kind != Kind::Sensor) continue;
        if (spec_.is_sensor(n.src) && n.package.source == n.src) {
          used_[k] = true;
        } else {
          add(Condition::V, u, name, "package from '" + n.package.source +
                                         "' logged as sensor input but its source is not a sensor");
          used_[k] = true;
        }
      }

      const InformationBuffer& ib0 = before.buffer;
      const InformationBuffer& ib1 = after.buffer;
      if (started_at(i, t + 1)) {
        if (before.busy || before.waiting)
          add(Condition::I, u, name,
              std::string("computation started although the context was ") +
                  (before.busy ? "busy" : "waiting") + " at " + tick(snap(t).time));
        if (!after.busy) add(Condition::I, u, name, "not busy at the tick its computation started");
        bool tail_ok = ib1.size() >= arr.size();
        std::size_t keep = tail_ok ? ib1.size() - arr.size() : 0;
        for (std::size_t a = 0; tail_ok && a < arr.size(); ++a)
          tail_ok = ib1[keep + a] == trace_.log[arr[a]].package;
        if (!tail_ok) {
          add(Condition::Suffix, u, name,
              "input buffer at computation start does not end with the packages added at this tick");
          continue;
        }
        InformationBuffer kept = ib1;
        if (!arr.empty()) {
          std::vector<DataPackage> v = ib1.to_vector();
          v.resize(keep);
          kept = InformationBuffer(std::move(v));
        }
        if (!kept.is_suffix_of(ib0)) {
          add(Condition::Suffix, u, name,
              "input buffer after the update is not a suffix of the previous input buffer");
          continue;
        }
        if (before.updater) check_update(i, t, kept);
        continue;
      }

      if (!before.busy && !before.waiting)
        add(Condition::I, u, name,
            "neither busy nor waiting at " + tick(snap(t).time) + " but no computation started");
      if (!ib0.is_prefix_of(ib1)) {
        add(Condition::V, u, name, "input buffer lost or changed packages while no computation started");
        continue;
      }
      std::size_t added = ib1.size() - ib0.size();
      bool match = added == arr.size();
      for (std::size_t a = 0; match && a < added; ++a)
        match = ib1[ib0.size() + a] == trace_.log[arr[a]].package;
      if (!match)
        add(Condition::V, u, name,
            "packages added to the input buffer do not match the logged notifications and "
            "sensor inputs");
    }
  }

  void check_update(int i, std::size_t t, const InformationBuffer& kept) {
    const Name& name = spec_.contexts[i].name;
    const ContextSnapshot& before = snap(t).contexts[i];
    const ContextSnapshot& after = snap(t + 1).contexts[i];
    ContextConfiguration cur = config_of(before);
    ContextConfiguration next;
    try {
      next = before.updater(before.buffer, before.kb, cur);
    } catch (const std::exception& e) {
      add(Condition::I, snap(t + 1).time, name, std::string("update function failed: ") + e.what());
      return;
    }
    std::string diff;
    if (!(next.kb == after.kb)) diff += " kb";
    if (next.semantics != after.semantics) diff += " semantics";
    if (!same_rules(next.management.rules, after.rules)) diff += " rules";
    if (!(next.buffer == kept)) diff += " buffer";
    if (!diff.empty())
      add(Condition::I, snap(t + 1).time, name,
          "configuration at computation start differs from the update function's result in:" + diff);
  }

  struct Computation {
    std::size_t start;
    std::optional<std::size_t> end;
  };

  /// Ticks t'' >= start where every stakeholder of context i received the
  /// eoc package.
  std::optional<std::size_t> find_end(int i, std::size_t start) {
    const Name& name = spec_.contexts[i].name;
    for (std::size_t t = start; t <= horizon(); ++t) {
      std::set<Name> st = stakeholders(snap(t).contexts[i].rule_span());
      if (st.empty()) return t;
      std::vector<std::size_t> found;
      for (const Name& n : st) {
        bool ok = false;
        for (std::size_t k : by_time_[t]) {
          const Notification& e = trace_.log[k];
          if (!used_[k] && e.kind == Kind::Eoc && e.src == name && e.dst == n &&
              e.package == DataPackage(name, std::vector<Info>{eoc_atom()})) {
            found.push_back(k);
            ok = true;
            break;
          }
        }
        if (!ok) break;
      }
      if (found.size() == st.size()) {
        for (std::size_t k : found) used_[k] = true;
        return t;
      }
    }
    return std::nullopt;
  }

  /// Conditions (ii) and (iii).
  void check_computations(int i) {
    const Name& name = spec_.contexts[i].name;
    std::vector<Computation> comps;
    for (std::size_t t = 1; t <= horizon(); ++t)
      if (started_at(i, t)) comps.push_back({t, find_end(i, t)});

    std::vector<bool> covered(horizon() + 1, false);
    for (const Computation& c : comps) {
      std::size_t last = c.end ? *c.end : horizon();
      for (std::size_t t = c.start; t <= last; ++t) {
        covered[t] = true;
        if (t > c.start && !snap(t).contexts[i].busy)
          add(Condition::II, snap(t).time, name,
              "not busy although the computation started at " + tick(snap(c.start).time) +
                  " has not ended");
      }
      if (c.end && *c.end + 1 <= horizon() && snap(*c.end + 1).contexts[i].busy &&
          !started_at(i, *c.end + 1)) {
        covered[*c.end + 1] = true;
        add(Condition::II, snap(*c.end + 1).time, name,
            "still busy the tick after its computation ended at " + tick(snap(*c.end).time));
      }
      check_notified(i, c);
    }
    for (std::size_t t = 0; t <= horizon(); ++t)
      if (snap(t).contexts[i].busy && !covered[t])
        add(Condition::II, snap(t).time, name, "busy without a running computation");
  }

  /// Matches every belief set of the computation's kb to a tick in
  /// [start, end] where its output reached every stakeholder. Small
  /// backtracking search over candidate ticks.
  void check_notified(int i, const Computation& c) {
    const Name& name = spec_.contexts[i].name;
    const ContextSnapshot& at = snap(c.start).contexts[i];
    const LogicSuite* suite = spec_.contexts[i].suite.get();
    const Semantics* sem = suite ? suite->find(at.semantics) : nullptr;
    if (!sem) {
      add(Condition::Def5, snap(c.start).time, name, "unknown semantics '" + at.semantics + "'");
      return;
    }
    std::vector<BeliefSet> acc;
    try {
      acc = sem->evaluate(at.kb);
    } catch (const std::exception& e) {
      add(Condition::III, snap(c.start).time, name,
          std::string("cannot evaluate the computation's knowledge base: ") + e.what());
      return;
    }
    std::size_t last = c.end ? *c.end : horizon();

    // candidates[b] = list of (tick, entries) that would justify belief set b.
    std::vector<std::vector<std::pair<std::size_t, std::vector<std::size_t>>>> candidates(acc.size());
    std::vector<bool> vacuous(acc.size(), false);
    for (std::size_t b = 0; b < acc.size(); ++b) {
      for (std::size_t t = c.start; t <= last; ++t) {
        auto rules = snap(t).contexts[i].rule_span();
        std::set<Name> st = stakeholders(rules);
        if (st.empty()) {
          vacuous[b] = true;
          break;
        }
        std::vector<std::size_t> entries;
        for (const Name& n : st) {
          DataPackage want = relout(name, acc[b], rules, n);
          bool ok = false;
          for (std::size_t k : by_time_[t]) {
            const Notification& e = trace_.log[k];
            if (!used_[k] && e.kind == Kind::BeliefSet && e.src == name && e.dst == n &&
                e.package == want) {
              entries.push_back(k);
              ok = true;
              break;
            }
          }
          if (!ok) break;
        }
        if (entries.size() == st.size()) candidates[b].push_back({t, std::move(entries)});
      }
    }

    std::vector<int> choice(acc.size(), -1);
    std::size_t budget = 100000;
    std::function<bool(std::size_t)> assign = [&](std::size_t b) -> bool {
      if (b == acc.size()) return true;
      if (vacuous[b]) return assign(b + 1);
      for (std::size_t o = 0; o < candidates[b].size(); ++o) {
        if (budget == 0) return false;
        --budget;
        const auto& entries = candidates[b][o].second;
        if (std::any_of(entries.begin(), entries.end(), [&](std::size_t k) { return used_[k]; }))
          continue;
        for (std::size_t k : entries) used_[k] = true;
        choice[b] = static_cast<int>(o);
        if (assign(b + 1)) return true;
        for (std::size_t k : entries) used_[k] = false;
        choice[b] = -1;
      }
      return false;
    };
    if (assign(0)) return;

    // No complete assignment: greedily keep what fits and report the rest.
    for (std::size_t b = 0; b < acc.size(); ++b) {
      if (vacuous[b]) continue;
      bool done = false;
      for (const auto& [t, entries] : candidates[b]) {
        if (std::any_of(entries.begin(), entries.end(), [&](std::size_t k) { return used_[k]; }))
          continue;
        for (std::size_t k : entries) used_[k] = true;
        done = true;
        break;
      }
      if (!done && c.end)
        add(Condition::III, snap(*c.end).time, name,
            "belief set " + render_belief_set(acc[b]) + " of the computation started at " +
                tick(snap(c.start).time) + " was not notified to every stakeholder before its end");
    }
  }

  /// Condition (iv) and the stream-source rule.
  void check_stream(std::size_t j) {
    const Name& name = spec_.output_streams[j];
    for (std::size_t t = 0; t < horizon(); ++t) {
      const InformationBuffer& ob0 = snap(t).streams[j];
      const InformationBuffer& ob1 = snap(t + 1).streams[j];
      const Tick u = snap(t + 1).time;
      std::vector<std::size_t> arr = arrivals(t + 1, name);
      for (std::size_t k : arr) {
        const Notification& n = trace_.log[k];
        if (n.kind == Kind::Sensor) {
          add(Condition::IV, u, name, "sensor package from '" + n.src + "' logged on an output stream");
          used_[k] = true;
        }
      }
      if (!ob0.is_prefix_of(ob1)) {
        add(Condition::IV, u, name, "output stream lost or changed packages");
        continue;
      }
      std::size_t added = ob1.size() - ob0.size();
      for (std::size_t a = ob0.size(); a < ob1.size(); ++a)
        if (spec_.context_index(ob1[a].source) < 0)
          add(Condition::Def5, u, name,
              "output stream received a package from non-context '" + ob1[a].source + "'");
      bool match = added == arr.size();
      for (std::size_t a = 0; match && a < added; ++a)
        match = ob1[ob0.size() + a] == trace_.log[arr[a]].package;
      if (!match)
        add(Condition::IV, u, name,
            "packages added to the output stream do not match the logged notifications");
    }
  }

  void report_unjustified() {
    for (std::size_t k = 0; k < trace_.log.size(); ++k) {
      if (used_[k]) continue;
      const Notification& n = trace_.log[k];
      if (n.kind == Kind::Update) continue;
      bool to_stream = spec_.stream_index(n.dst) >= 0;
      add(to_stream ? Condition::IV : Condition::V, n.time, n.dst,
          std::string(kind_name(n.kind)) + " package from '" + n.src +
              "' is not justified by any computation");
    }
  }

  const AMCSSpec& spec_;
  const RunTrace& trace_;
  std::vector<std::vector<std::size_t>> by_time_;
  std::vector<bool> used_;
  std::vector<Violation> out_;
};

}  // namespace

std::vector<Violation> validate_run(const AMCSSpec& spec, const RunTrace& trace) {
  return Validator(spec, trace).run();
}

}  // namespace amcs
