// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 iff all
// criteria pass.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "amcs/caet.hpp"
#include "amcs/formalisms.hpp"
#include "amcs/registry.hpp"
#include "amcs/rmcs.hpp"
#include "amcs/trace_io.hpp"
#include "amcs/validate.hpp"
#include "mutants.hpp"
#include "oracles.hpp"
#include "random_systems.hpp"

using namespace amcs;

namespace {

constexpr int kRandomSystems = 1000;
constexpr double kRandomSystemsSeconds = 60.0;
constexpr int kRmcsInstances = 200;
constexpr double kRmcsSeconds = 120.0;
constexpr int kPrograms = 150;
constexpr int kMinPrograms = 100;
constexpr int kChoiceInstances = 60;
constexpr int kMinChoiceInstances = 50;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail) {
  std::cout << (ok ? "PASS" : "FAIL") << "  criterion " << id << " " << name << ": " << detail
            << std::endl;
  if (!ok) ++failures;
}

void run_conformance() {
  auto start = Clock::now();
  int clean = 0;
  std::size_t violations = 0;
  std::string first;
  for (int s = 0; s < kRandomSystems; ++s) {
    auto sys = gen::random_system(1000 + s);
    RunTrace tr = gen::run_random(sys);
    auto v = validate_run(tr);
    if (v.empty() && !tr.fault) {
      ++clean;
    } else {
      violations += v.size();
      if (first.empty())
        first = "system seed " + std::to_string(1000 + s) + ": " +
                (tr.fault ? "fault " + tr.fault->message : render_violation(v.front()));
    }
  }
  double secs = seconds_since(start);
  std::ostringstream d;
  d << clean << "/" << kRandomSystems << " runs valid, " << violations << " violations, "
    << secs << " s (limit " << kRandomSystemsSeconds << " s)";
  if (!first.empty()) d << "; first: " << first;
  report(1, "run-semantics conformance", clean == kRandomSystems && secs < kRandomSystemsSeconds, d.str());
}

RunTrace caet_trace() {
  LoadedSystem sys = caet::build_caet();
  auto sensors = caet::bundled_sensors(sys);
  return run(sys.spec, sys.init, sensors, caet::kGoldenHorizon,
             LatencyModel::parse(caet::kGoldenLatency, sys.spec), caet::kGoldenSeed);
}

void run_mutation() {
  RunTrace base = caet_trace();
  int caught = 0, total = 0;
  std::string missed;
  bool base_clean = validate_run(base).empty();
  for (const mutants::Mutant& m : mutants::all(base)) {
    ++total;
    bool ok = false;
    if (m.trace) {
      for (const Violation& v : validate_run(*m.trace))
        if (v.condition == m.expected) ok = true;
    }
    if (ok) ++caught;
    else missed += (missed.empty() ? "" : ", ") + m.name;
  }
  std::ostringstream d;
  d << caught << "/" << total << " mutants caught with the expected condition";
  if (!base_clean) d << "; unmutated trace is not clean";
  if (!missed.empty()) d << "; missed: " << missed;
  report(2, "mutation sensitivity", base_clean && caught == 6 && total == 6, d.str());
}

void run_rmcs() {
  auto start = Clock::now();
  int equal = 0;
  std::string first;
  for (int s = 0; s < kRmcsInstances; ++s) {
    SimpleRMCS m = gen::random_rmcs(5000 + s);
    Observation obs;
    if (!m.sensors.empty()) obs["s"] = {Term::symbol(s % 2 ? "on" : "off")};
    auto expected = brute_force_equilibria(m, obs);
    Simulation sim = build_simulation(m, obs);
    LatencyModel latency = LatencyModel::uniform(1, 3);
    RunTrace tr = run(sim.spec, sim.init, {}, simulation_horizon(sim, 3), latency, s);
    auto got = extract_equilibria(tr);
    if (got == expected && !tr.fault) ++equal;
    else if (first.empty()) first = "instance seed " + std::to_string(5000 + s);
  }
  double secs = seconds_since(start);
  std::ostringstream d;
  d << equal << "/" << kRmcsInstances << " instances match the oracle, " << secs << " s (limit "
    << kRmcsSeconds << " s)";
  if (!first.empty()) d << "; first mismatch: " << first;
  report(3, "rMCS oracle equivalence", equal == kRmcsInstances && secs < kRmcsSeconds, d.str());
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void run_determinism(const std::string& cli, const std::string& data_dir) {
  auto tmp = std::filesystem::temp_directory_path();
  std::string a = (tmp / "amcs_accept_a.golden").string(), b = (tmp / "amcs_accept_b.golden").string();
  std::string args = " run " + data_dir + "/caet.amcs " + data_dir +
                     "/caet.sensors --horizon 200 --seed 7 --latency fixed:2 --format golden --out ";
  int ra = std::system((cli + args + a).c_str());
  int rb = std::system((cli + args + b).c_str());
  std::string ta = slurp(a), tb = slurp(b);
  bool cli_same = ra == 0 && rb == 0 && !ta.empty() && ta == tb;
  bool golden_same = ta == slurp(data_dir + "/caet.golden");
  std::filesystem::remove(a);
  std::filesystem::remove(b);

  int random_same = 0;
  const int random_runs = 50;
  for (int s = 0; s < random_runs; ++s) {
    auto sys = gen::random_system(9000 + s);
    if (trace_to_string(gen::run_random(sys)) == trace_to_string(gen::run_random(sys))) ++random_same;
  }
  std::ostringstream d;
  d << "CLI CAET runs " << (cli_same ? "byte-identical" : "DIFFER") << ", "
    << (golden_same ? "equal to" : "DIFFERENT from") << " caet.golden; " << random_same << "/"
    << random_runs << " random systems reproduce";
  report(4, "determinism", cli_same && golden_same && random_same == random_runs, d.str());
}

void run_caet(const std::string& data_dir) {
  LoadedSystem sys = caet::build_caet();
  auto sensors = caet::bundled_sensors(sys);
  RunTrace tr = parse_trace(slurp(data_dir + "/caet.golden"), builtin_suites());
  // The behavioural checks evaluate tp belief sets, so they need the suites
  // of the parsed trace, which the resolver supplies.
  auto failures_list = caet::check_behaviour(tr, sensors);
  auto violations = validate_run(tr);
  std::ostringstream d;
  d << failures_list.size() << " behavioural check failures, " << violations.size()
    << " run-condition violations on caet.golden";
  for (const std::string& f : failures_list) d << "; " << f;
  report(5, "CAET behaviour", failures_list.empty() && violations.empty() && !tr.fault, d.str());
}

void run_formalisms(const std::string& data_dir) {
  int programs = 0, agree = 0;
  auto check = [&](const Program& p) {
    ++programs;
    auto models = oracle::stable_models(p);
    if (models.size() == 1 && models.front() == perfect_model(p)) ++agree;
  };
  for (const auto& entry : std::filesystem::directory_iterator(data_dir + "/programs"))
    if (entry.path().extension() == ".lp") check(parse_program(slurp(entry.path())));
  oracle::Gen g(77);
  for (int i = 0; i < kPrograms; ++i) check(oracle::random_stratified_program(g));

  int choices = 0, choice_agree = 0;
  for (int i = 0; i < kChoiceInstances; ++i) {
    Program p = oracle::random_stratified_program(g, true);
    ++choices;
    auto expected = oracle::choice_models(p);
    auto got = enumerate_choices(p);
    if (std::vector<BeliefSet>(expected.begin(), expected.end()) == got) ++choice_agree;
  }
  std::ostringstream d;
  d << agree << "/" << programs << " stratified programs agree with the stable-model enumerator, "
    << choice_agree << "/" << choices << " choice programs match the cross product";
  report(6, "formalism correctness",
         programs >= kMinPrograms && agree == programs && choices >= kMinChoiceInstances &&
             choice_agree == choices,
         d.str());
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 3) {
    std::cerr << "usage: acceptance <amcs-cli> <data-dir>\n";
    return 2;
  }
  std::string cli = argv[1], data = argv[2];
  std::vector<std::pair<int, std::function<void()>>> criteria{
      {1, run_conformance},
      {2, run_mutation},
      {3, run_rmcs},
      {4, [&] { run_determinism(cli, data); }},
      {5, [&] { run_caet(data); }},
      {6, [&] { run_formalisms(data); }},
  };
  for (auto& [id, f] : criteria) {
    try {
      f();
    } catch (const std::exception& e) {
      report(id, "aborted", false, e.what());
    }
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
