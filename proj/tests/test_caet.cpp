#include <doctest.h>

#include <fstream>
#include <map>
#include <sstream>

#include "amcs/caet.hpp"
#include "amcs/formalisms.hpp"
#include "amcs/trace_io.hpp"
#include "amcs/validate.hpp"
#include "oracles.hpp"

using namespace amcs;
using caet::Cell;

namespace {

Term loc(int x, int y) { return caet::location_term({x, y}); }

std::set<Info> congested(std::initializer_list<std::pair<int, int>> cells) {
  std::set<Info> s;
  for (auto [x, y] : cells) s.insert(Term::compound("congested", {loc(x, y)}));
  return s;
}

/// Cheapest monotone path by explicit enumeration of every path.
int eta_by_paths(Cell a, Cell b, const std::set<Info>& traffic) {
  int best = -1;
  std::function<void(Cell, int)> walk = [&](Cell c, int cost) {
    if (c == b) {
      if (best < 0 || cost < best) best = cost;
      return;
    }
    auto enter = [&](Cell n) {
      int step = caet::kMinutesPerCell;
      if (traffic.contains(Term::compound("congested", {caet::location_term(n)}))) step *= caet::kCongestionFactor;
      walk(n, cost + step);
    };
    if (c.x != b.x) enter({c.x + (b.x > c.x ? 1 : -1), c.y});
    if (c.y != b.y) enter({c.x, c.y + (b.y > c.y ? 1 : -1)});
  };
  walk(a, 0);
  return best;
}

RunTrace golden_run(const std::vector<SensorEvent>& sensors) {
  LoadedSystem sys = caet::build_caet();
  return run(sys.spec, sys.init, sensors, caet::kGoldenHorizon,
             LatencyModel::parse(caet::kGoldenLatency, sys.spec), caet::kGoldenSeed);
}

int context(const RunTrace& tr, const char* name) { return tr.spec.context_index(name); }

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// Properties every tp computation must have, whatever the inputs.
void check_planner_invariants(const RunTrace& tr) {
  int tp = context(tr, "tp");
  const Semantics* sem = tr.spec.contexts[tp].suite->find("perfect");
  for (const Notification& n : tr.log) {
    if (n.kind != Notification::Kind::Update || n.src != "tp") continue;
    const ContextSnapshot& at = tr.snapshots[static_cast<std::size_t>(n.time)].contexts[tp];
    for (const BeliefSet& bs : sem->evaluate(at.kb)) {
      std::map<Term, int> assign, suggest;
      for (const Belief& b : bs) {
        if (b.name() == "assign" && b.arity() == 2) ++assign[b.arg(0)];
        if (b.name() == "sugassignment" && b.arity() == 2) ++suggest[b.arg(0)];
      }
      for (const auto& [a, k] : assign) CHECK_MESSAGE(k == 1, "double assign at t=", n.time);
      for (const auto& [a, k] : suggest) CHECK(k == 1);
      CHECK(suggest.size() <= 1);
      for (const Info& q : relout("tp", bs, at.rule_span(), "na").infos)
        if (q.name() == "querya") CHECK_FALSE(assign.contains(q.arg(0)));
    }
  }
}

}  // namespace

TEST_CASE("nav_eta") {
  CHECK(caet::nav_eta(loc(3, 3), loc(3, 3), {}) == 0);
  CHECK(caet::nav_eta(loc(0, 0), loc(2, 1), {}) == 6);
  CHECK(caet::nav_eta(loc(0, 0), loc(2, 1), congested({{2, 1}})) == 8);
  // a detour-free path around one congested cell exists
  CHECK(caet::nav_eta(loc(0, 0), loc(2, 1), congested({{1, 0}})) == 6);
  CHECK(caet::nav_eta(loc(0, 0), loc(2, 1), congested({{1, 0}, {1, 1}, {0, 1}})) == 8);
  CHECK(caet::nav_eta(loc(5, 5), loc(2, 9), {}) == caet::nav_eta(loc(2, 9), loc(5, 5), {}));
  CHECK_THROWS_AS(caet::nav_eta(loc(0, 0), parse_term("p(10,0)"), {}), std::invalid_argument);
  CHECK_THROWS_AS(caet::nav_eta(parse_term("home"), loc(0, 0), {}), std::invalid_argument);
}

TEST_CASE("nav_eta matches path enumeration") {
  oracle::Gen g(21);
  for (int i = 0; i < 300; ++i) {
    Cell a{g.range(0, 6), g.range(0, 6)}, b{g.range(0, 6), g.range(0, 6)};
    std::set<Info> traffic;
    int k = g.range(0, 8);
    for (int j = 0; j < k; ++j) traffic.insert(Term::compound("congested", {loc(g.range(0, 6), g.range(0, 6))}));
    CHECK(caet::nav_eta(caet::location_term(a), caet::location_term(b), traffic) == eta_by_paths(a, b, traffic));
  }
}

TEST_CASE("locations") {
  CHECK(caet::parse_location(parse_term("p(4,7)")) == Cell{4, 7});
  CHECK(caet::location_term({4, 7}) == parse_term("p(4,7)"));
  CHECK_THROWS_AS(caet::parse_location(parse_term("p(11,0)")), std::invalid_argument);
  CHECK_THROWS_AS(caet::parse_location(parse_term("q(1,1)")), std::invalid_argument);
}

TEST_CASE("navigation suite") {
  SuitePtr nav = caet::nav_suite();
  KnowledgeBase kb = nav->parse_kb("queryc(c1,p(2,1)).\nquerya(a1,p(0,0)).\nquerya(a2,p(2,3)).\ncongested(p(2,1)).");
  auto out = nav->find("eta")->evaluate(kb);
  REQUIRE(out.size() == 1);
  CHECK(out[0].contains(parse_term("eta(c1,a1,8)")));
  CHECK(out[0].contains(parse_term("eta(c1,a2,6)")));
  CHECK(out[0].contains(parse_term("congested(p(2,1))")));
}

TEST_CASE("scenario structure") {
  LoadedSystem sys = caet::build_caet();
  CHECK(validate_system(sys.spec, sys.init).empty());
  std::vector<Name> names;
  for (const Context& c : sys.spec.contexts) names.push_back(c.name);
  CHECK(names == std::vector<Name>{"ca", "mo", "tp", "am", "na"});
  CHECK(sys.spec.sensors == std::vector<Name>{"er_employee_in", "dispatcher_in", "traffic", "ambulance"});
  CHECK(sys.spec.output_streams == std::vector<Name>{"er_employee_out", "dispatcher_out", "ambulance_out"});

  const auto& tp = sys.init.contexts[static_cast<std::size_t>(sys.spec.context_index("tp"))];
  CHECK(stakeholders(tp.rules()) == std::set<Name>{"dispatcher_out", "na", "ambulance_out"});
  BeliefSet s{parse_term("sugassignment(a1,c1)")};
  CHECK(relout("tp", s, tp.rules(), "dispatcher_out") == parse_package("tp[assign(a1,c1)]"));

  // wiring: who sends to whom
  std::map<Name, std::set<Name>> wires;
  for (std::size_t i = 0; i < sys.spec.contexts.size(); ++i)
    for (const Name& n : stakeholders(sys.init.contexts[i].rules())) wires[sys.spec.contexts[i].name].insert(n);
  CHECK(wires["ca"].contains("mo"));
  CHECK(wires["mo"].contains("ca"));
  CHECK(wires["ca"].contains("tp"));
  CHECK(wires["am"].contains("tp"));
  CHECK(wires["tp"].contains("na"));
  CHECK(wires["na"].contains("tp"));
}

TEST_CASE("golden trace") {
  LoadedSystem sys = caet::build_caet();
  auto sensors = caet::bundled_sensors(sys);
  RunTrace tr = golden_run(sensors);
  CHECK_FALSE(tr.fault);
  CHECK(trace_to_string(tr) == slurp(AMCS_DATA_DIR "/caet.golden"));
  CHECK(validate_run(tr).empty());
  auto failures = caet::check_behaviour(tr, sensors);
  for (const auto& f : failures) MESSAGE(f);
  CHECK(failures.empty());
  check_planner_invariants(tr);
}

TEST_CASE("scenario behaviour") {
  LoadedSystem sys = caet::build_caet();
  RunTrace tr = golden_run(caet::bundled_sensors(sys));
  const InformationBuffer& er = tr.snapshots.back().streams[0];
  const InformationBuffer& amb = tr.snapshots.back().streams[2];
  auto stream_has = [](const InformationBuffer& b, const char* info) {
    for (std::size_t k = 0; k < b.size(); ++k)
      if (b[k].contains(parse_term(info))) return true;
    return false;
  };
  SUBCASE("priorities") {
    CHECK(stream_has(er, "priority(c1,1)"));
    CHECK(stream_has(er, "priority(c2,1)"));
    CHECK_FALSE(stream_has(er, "priority(c2,4)"));
    CHECK(stream_has(er, "priority(c3,2)"));
    CHECK(stream_has(er, "ask(c1,symptoms)"));
  }
  SUBCASE("assignments reach the crews") {
    for (const char* a : {"assigned(a1,c1)", "assigned(a3,c2)", "assigned(a2,c3)", "assigned(a1,c4)"})
      CHECK(stream_has(amb, a));
  }
  SUBCASE("availability report clears the old assignment") {
    int tp = context(tr, "tp");
    bool seen = false;
    for (const Notification& n : tr.log) {
      if (n.kind != Notification::Kind::Update || n.src != "tp" || n.time <= 100) continue;
      const Program& kb = program_of(tr.snapshots[static_cast<std::size_t>(n.time)].contexts[tp].kb);
      if (!kb.facts.contains(parse_term("avail(a1,p(2,3))"))) continue;
      seen = true;
      CHECK_FALSE(kb.facts.contains(parse_term("assign(a1,c1)")));
      break;
    }
    CHECK(seen);
  }
  SUBCASE("broken trace fails the checks") {
    RunTrace broken = tr;
    for (Snapshot& s : broken.snapshots) s.streams[2] = InformationBuffer{};
    CHECK_FALSE(caet::check_behaviour(broken, caet::bundled_sensors(sys)).empty());
  }
}

TEST_CASE("planner invariants under perturbed sensor scripts") {
  LoadedSystem sys = caet::build_caet();
  auto base = caet::bundled_sensors(sys);
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    CAPTURE(seed);
    oracle::Gen g(seed);
    std::vector<SensorEvent> events;
    for (SensorEvent e : base) {
      if (g.coin(10)) continue;
      e.time = std::max<Tick>(1, e.time + g.range(-3, 3));
      events.push_back(std::move(e));
    }
    std::stable_sort(events.begin(), events.end(), [](const SensorEvent& a, const SensorEvent& b) { return a.time < b.time; });
    LatencyModel lat = LatencyModel::uniform(1, 3);
    RunTrace tr = run(sys.spec, sys.init, events, caet::kGoldenHorizon, lat, seed);
    REQUIRE_FALSE(tr.fault);
    CHECK(validate_run(tr).empty());
    check_planner_invariants(tr);
  }
}
