#include "amcs/caet.hpp"

#include <algorithm>
#include <climits>
#include <map>

#include "amcs/formalisms.hpp"
#include "amcs/registry.hpp"

namespace amcs::caet {

Cell parse_location(const Term& t) {
  auto coord = [&](const Term& a) {
    if (!a.is_integer()) throw std::invalid_argument("unknown location " + render_term(t));
    long long v = a.as_integer();
    if (v < 0 || v >= kGridSize) throw std::invalid_argument("location off the grid " + render_term(t));
    return static_cast<int>(v);
  };
  if (t.name() != "p" || t.arity() != 2) throw std::invalid_argument("unknown location " + render_term(t));
  return {coord(t.arg(0)), coord(t.arg(1))};
}

Term location_term(Cell c) {
  return Term::compound("p", {Term::symbol(std::to_string(c.x)), Term::symbol(std::to_string(c.y))});
}

int nav_eta(const Term& from, const Term& to, const std::set<Info>& traffic) {
  Cell a = parse_location(from), b = parse_location(to);
  int sx = b.x >= a.x ? 1 : -1, sy = b.y >= a.y ? 1 : -1;
  int nx = std::abs(b.x - a.x), ny = std::abs(b.y - a.y);
  auto cost = [&](int i, int j) {
    Cell c{a.x + sx * i, a.y + sy * j};
    Term cong = Term::compound("congested", {location_term(c)});
    return kMinutesPerCell * (traffic.contains(cong) ? kCongestionFactor : 1);
  };
  // best[i][j]: cheapest monotone path from a to (a.x+sx*i, a.y+sy*j).
  std::vector<std::vector<int>> best(nx + 1, std::vector<int>(ny + 1, INT_MAX));
  best[0][0] = 0;
  for (int i = 0; i <= nx; ++i)
    for (int j = 0; j <= ny; ++j) {
      if (i == 0 && j == 0) continue;
      int prev = INT_MAX;
      if (i > 0) prev = std::min(prev, best[i - 1][j]);
      if (j > 0) prev = std::min(prev, best[i][j - 1]);
      best[i][j] = prev + cost(i, j);
    }
  return best[nx][ny];
}

namespace {

std::vector<BeliefSet> eta_semantics(const KnowledgeBase& kb) {
  const Program& p = program_of(kb);
  std::set<Info> traffic;
  std::vector<std::pair<Term, Term>> ambulances, cases;
  for (const Info& f : p.facts) {
    if (f.name() == "congested" && f.arity() == 1) traffic.insert(f);
    else if (f.name() == "querya" && f.arity() == 2) ambulances.emplace_back(f.arg(0), f.arg(1));
    else if (f.name() == "queryc" && f.arity() == 2) cases.emplace_back(f.arg(0), f.arg(1));
  }
  BeliefSet out = p.facts;
  for (const auto& [c, lc] : cases)
    for (const auto& [a, la] : ambulances)
      out.insert(Term::compound(
          "eta", {c, a, Term::symbol(std::to_string(nav_eta(la, lc, traffic)))}));
  return {out};
}

}  // namespace

SuitePtr nav_suite() {
  static const SuitePtr s = [] {
    auto suite = std::make_shared<LogicSuite>();
    suite->tag = "nav";
    suite->admissible = [](const KnowledgeBase& kb) {
      const Program* p = kb.as<Program>();
      return kb.formalism() == "nav" && p && p->rules.empty() && p->choices.empty();
    };
    suite->semantics = {{"eta", eta_semantics}};
    suite->parse_kb = [](std::string_view text) { return make_kb("nav", parse_program(text)); };
    return SuitePtr(suite);
  }();
  return s;
}

LoadedSystem build_caet() { return parse_system(system_text(), builtin_suites()); }

std::vector<SensorEvent> bundled_sensors(const LoadedSystem& sys) {
  return parse_sensor_events(sensor_text(), sys);
}

// --- behavioural checks -------------------------------------------------------------

namespace {

std::map<Term, int> count_by_first(const BeliefSet& s, std::string_view pred) {
  std::map<Term, int> out;
  for (const Belief& b : s)
    if (b.name() == pred && b.arity() == 2) ++out[b.arg(0)];
  return out;
}

bool has_pred_with(const BeliefSet& s, std::string_view pred, std::size_t pos, const Term& v) {
  return std::any_of(s.begin(), s.end(), [&](const Belief& b) {
    return b.name() == pred && b.arity() == 2 && b.arg(pos) == v;
  });
}

}  // namespace

std::vector<std::string> check_behaviour(const RunTrace& trace,
                                         const std::vector<SensorEvent>& sensors) {
  std::vector<std::string> failures;
  const AMCSSpec& spec = trace.spec;
  int tp = spec.context_index("tp");
  int amb = spec.stream_index("ambulance_out");
  int disp = spec.stream_index("dispatcher_out");
  if (tp < 0 || amb < 0 || disp < 0 || trace.snapshots.empty()) {
    failures.push_back("trace is not a CAET trace");
    return failures;
  }
  const Snapshot& last = trace.snapshots.back();

  // Exactly one assignment notification per case.
  std::set<Term> cases;
  for (const SensorEvent& e : sensors)
    if (e.package.source == "er_employee_in" && e.time <= last.time)
      for (const Info& i : e.package.infos)
        if (i.name() == "call" && i.arity() == 2) cases.insert(i.arg(0));
  for (const Term& c : cases) {
    int n = 0;
    const InformationBuffer& ob = last.streams[amb];
    for (std::size_t p = 0; p < ob.size(); ++p)
      if (std::any_of(ob[p].infos.begin(), ob[p].infos.end(), [&](const Info& i) {
            return i.name() == "assigned" && i.arity() == 2 && i.arg(1) == c;
          }))
        ++n;
    if (n != 1)
      failures.push_back("case " + render_term(c) + " received " + std::to_string(n) +
                         " assignment notifications on ambulance_out");
  }

  // Belief sets of every tp computation.
  const Semantics* sem = nullptr;
  std::vector<std::pair<Tick, BeliefSet>> tp_sets;
  for (const Notification& n : trace.log) {
    if (n.kind != Notification::Kind::Update || n.src != spec.contexts[tp].name) continue;
    if (n.time >= static_cast<Tick>(trace.snapshots.size())) continue;
    const ContextSnapshot& c = trace.snapshots[n.time].contexts[tp];
    sem = spec.contexts[tp].suite->find(c.semantics);
    if (!sem) continue;
    for (BeliefSet& bs : sem->evaluate(c.kb)) tp_sets.emplace_back(n.time, std::move(bs));
  }
  for (const auto& [t, bs] : tp_sets)
    for (std::string_view pred : {"assign", "sugassignment"})
      for (const auto& [a, k] : count_by_first(bs, pred))
        if (k > 1)
          failures.push_back("tp belief set of the computation started at t=" + std::to_string(t) +
                             " has " + std::to_string(k) + " " + std::string(pred) + " atoms for " +
                             render_term(a));

  // Overrides.
  int overrides = 0;
  for (const SensorEvent& e : sensors) {
    if (e.package.source != "dispatcher_in" || e.time > last.time) continue;
    for (const Info& i : e.package.infos) {
      if (i.name() != "assign" || i.arity() != 2) continue;
      bool suggested = false;
      for (const Notification& n : trace.log)
        if (n.time < e.time && n.dst == spec.output_streams[disp] && n.package.contains(i))
          suggested = true;
      if (suggested) continue;
      ++overrides;
      const BeliefSet* next = nullptr;
      for (const auto& [t, bs] : tp_sets)
        if (t > e.time && bs.contains(i)) {
          next = &bs;
          break;
        }
      if (!next) {
        failures.push_back("override " + render_term(i) + " never reached a tp computation");
        continue;
      }
      if (has_pred_with(*next, "sugassignment", 0, i.arg(0)) ||
          has_pred_with(*next, "sugassignment", 1, i.arg(1)))
        failures.push_back("override " + render_term(i) +
                           " is not reflected in the next tp suggestions");
    }
  }
  if (overrides == 0) failures.push_back("the sensor script contains no dispatcher override");
  return failures;
}

}  // namespace amcs::caet
