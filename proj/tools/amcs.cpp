// amcs: run, validate and inspect asynchronous multi-context systems.
//
// Exit codes:
//   0  success
//   1  IO, parse or argument error
//   2  the system description violates the definition
//   3  the run stopped on a run-time fault
//   4  the trace violates the run conditions
//   5  rMCS atom universe too large for the oracle
//   6  a check failed (rmcs --compare differs, caet --check)

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "amcs/caet.hpp"
#include "amcs/registry.hpp"
#include "amcs/rmcs.hpp"
#include "amcs/spec_io.hpp"
#include "amcs/trace_io.hpp"
#include "amcs/validate.hpp"

using namespace amcs;

namespace {

enum Exit { kOk = 0, kInput = 1, kSpec = 2, kFault = 3, kTrace = 4, kUniverse = 5, kCheck = 6 };

struct RunRequest {
  std::string spec_path;
  std::string sensors_path;
  Tick horizon = 0;
  std::uint64_t seed = 0;
  std::string latency = "fixed:1";
  std::string out_path;
  std::string format = "text";
};

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void print_violations(const std::vector<Violation>& v) {
  for (const Violation& x : v) std::cout << render_violation(x) << "\n";
}

int emit(const RunTrace& trace, const RunRequest& req) {
  std::ofstream file;
  if (!req.out_path.empty()) {
    file.open(req.out_path, std::ios::binary);
    if (!file) throw InputError("cannot write '" + req.out_path + "'");
  }
  std::ostream& out = req.out_path.empty() ? std::cout : file;
  if (req.format == "golden") write_trace(out, trace);
  else write_log(out, trace);
  if (trace.fault) {
    std::cerr << "run-time fault at t=" << trace.fault->time << " in " << trace.fault->context
              << ": " << trace.fault->message << "\n";
    return kFault;
  }
  return kOk;
}

LatencyModel latency_of(const std::string& text, const AMCSSpec& spec) {
  try {
    return LatencyModel::parse(text, spec);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
}

int execute(const LoadedSystem& sys, const std::vector<SensorEvent>& sensors, const RunRequest& req,
            RunTrace& trace) {
  LatencyModel latency = latency_of(req.latency, sys.spec);
  try {
    trace = run(sys.spec, sys.init, sensors, req.horizon, latency, req.seed);
  } catch (const SpecError& e) {
    print_violations(e.violations());
    return kSpec;
  }
  return emit(trace, req);
}

int cmd_run(const RunRequest& req) {
  LoadedSystem sys;
  std::vector<SensorEvent> sensors;
  try {
    sys = load_system(req.spec_path, builtin_suites());
  } catch (const LoadError& e) {
    throw InputError(req.spec_path + ": " + e.what());
  }
  if (!req.sensors_path.empty()) {
    try {
      sensors = load_sensor_events(req.sensors_path, sys);
    } catch (const LoadError& e) {
      throw InputError(req.sensors_path + ": " + e.what());
    }
  }
  RunTrace trace;
  return execute(sys, sensors, req, trace);
}

int cmd_validate(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const LoadError& e) {
    throw InputError(e.what());
  }
  std::vector<Violation> v;
  try {
    RunTrace trace = parse_trace(text, builtin_suites());
    v = validate_run(trace);
  } catch (const std::exception& e) {
    throw InputError(path + ": " + e.what());
  }
  print_violations(v);
  if (!v.empty()) return kTrace;
  std::cout << "ok\n";
  return kOk;
}

struct RmcsRequest {
  std::string spec_path;
  bool oracle = false;
  bool simulate = false;
  bool compare = false;
  Tick horizon = -1;
  std::uint64_t seed = 0;
  std::string latency = "fixed:1";
  std::vector<std::string> obs;
};

Observation parse_observation(const std::vector<std::string>& items) {
  Observation obs;
  for (const std::string& item : items) {
    auto eq = item.find('=');
    if (eq == std::string::npos) throw InputError("--obs expects sensor=atoms, got '" + item + "'");
    try {
      for (const Info& a : parse_term_list(item.substr(eq + 1), false))
        obs[item.substr(0, eq)].insert(a);
    } catch (const SyntaxError& e) {
      throw InputError("--obs '" + item + "': " + e.what());
    }
    obs.try_emplace(item.substr(0, eq));
  }
  return obs;
}

void print_equilibria(const std::string& label, const std::set<EquilibriumCandidate>& eq) {
  std::cout << label << ": " << eq.size() << " equilibria\n";
  for (const EquilibriumCandidate& c : eq) std::cout << "  " << render_candidate(c) << "\n";
}

int cmd_rmcs(const RmcsRequest& req) {
  SimpleRMCS m;
  try {
    m = load_rmcs(req.spec_path);
  } catch (const std::exception& e) {
    throw InputError(req.spec_path + ": " + e.what());
  }
  Observation obs = parse_observation(req.obs);
  for (const auto& [s, atoms] : obs)
    if (std::find(m.sensors.begin(), m.sensors.end(), s) == m.sensors.end())
      throw InputError("--obs names unknown sensor '" + s + "'");
  try {
    std::set<EquilibriumCandidate> expected, simulated;
    if (req.oracle || req.compare) expected = brute_force_equilibria(m, obs);
    if (req.simulate || req.compare) {
      Simulation sim = build_simulation(m, obs);
      LatencyModel latency = latency_of(req.latency, sim.spec);
      Tick horizon = req.horizon >= 0 ? req.horizon
                                      : simulation_horizon(sim, std::max<Tick>(latency.max_gap(), 1));
      RunTrace trace = run(sim.spec, sim.init, {}, horizon, latency, req.seed);
      if (trace.fault) {
        std::cerr << "run-time fault at t=" << trace.fault->time << " in " << trace.fault->context
                  << ": " << trace.fault->message << "\n";
        return kFault;
      }
      simulated = extract_equilibria(trace);
    }
    if (req.oracle) print_equilibria("oracle", expected);
    if (req.simulate) print_equilibria("simulation", simulated);
    if (req.compare) {
      bool equal = expected == simulated;
      std::cout << (equal ? "EQUAL" : "DIFFER") << "\n";
      if (!equal) {
        print_equilibria("oracle", expected);
        print_equilibria("simulation", simulated);
        return kCheck;
      }
    }
  } catch (const UniverseTooLarge& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUniverse;
  } catch (const SpecError& e) {
    print_violations(e.violations());
    return kSpec;
  }
  return kOk;
}

int cmd_caet(RunRequest req, bool check) {
  LoadedSystem sys = caet::build_caet();
  std::vector<SensorEvent> sensors = caet::bundled_sensors(sys);
  RunTrace trace;
  int code = execute(sys, sensors, req, trace);
  if (code != kOk || !check) return code;
  auto failures = caet::check_behaviour(trace, sensors);
  for (const std::string& f : failures) std::cerr << "check failed: " << f << "\n";
  return failures.empty() ? kOk : kCheck;
}

void add_run_options(CLI::App* cmd, RunRequest& req) {
  cmd->add_option("--horizon", req.horizon, "last tick to compute")->check(CLI::NonNegativeNumber);
  cmd->add_option("--seed", req.seed, "random seed");
  cmd->add_option("--latency", req.latency, "fixed:k | uniform:a..b | table:path");
  cmd->add_option("--out", req.out_path, "output file (default stdout)");
  cmd->add_option("--format", req.format, "text (log only) or golden (full trace)")
      ->check(CLI::IsMember({"text", "golden"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Asynchronous multi-context systems"};
  app.footer(
      "exit codes: 0 ok, 1 input error, 2 invalid system, 3 run-time fault, "
      "4 trace violations, 5 universe too large, 6 check failed");
  app.require_subcommand(1);

  RunRequest run_req;
  auto* run_cmd = app.add_subcommand("run", "execute a system and write its trace");
  run_cmd->add_option("spec", run_req.spec_path, "system description (.amcs)")->required();
  run_cmd->add_option("sensors", run_req.sensors_path, "sensor events");
  add_run_options(run_cmd, run_req);

  std::string trace_path;
  auto* validate_cmd = app.add_subcommand("validate", "check a golden-format trace");
  validate_cmd->add_option("trace", trace_path, "trace file")->required();

  RmcsRequest rmcs_req;
  auto* rmcs_cmd = app.add_subcommand("rmcs", "equilibria of a reactive MCS");
  rmcs_cmd->add_option("spec", rmcs_req.spec_path, "rMCS description (.rmcs)")->required();
  auto* oracle = rmcs_cmd->add_flag("--oracle", rmcs_req.oracle, "brute-force enumeration");
  auto* simulate = rmcs_cmd->add_flag("--simulate", rmcs_req.simulate, "run the aMCS simulation");
  auto* compare = rmcs_cmd->add_flag("--compare", rmcs_req.compare, "both, print EQUAL or DIFFER");
  oracle->excludes(simulate, compare);
  simulate->excludes(compare);
  rmcs_cmd->add_option("--horizon", rmcs_req.horizon, "default: enough for one round")
      ->check(CLI::NonNegativeNumber);
  rmcs_cmd->add_option("--seed", rmcs_req.seed, "random seed");
  rmcs_cmd->add_option("--latency", rmcs_req.latency, "fixed:k | uniform:a..b");
  rmcs_cmd->add_option("--obs", rmcs_req.obs, "sensor reading, e.g. door=open");

  RunRequest caet_req;
  caet_req.horizon = caet::kGoldenHorizon;
  caet_req.seed = caet::kGoldenSeed;
  caet_req.latency = std::string(caet::kGoldenLatency);
  caet_req.format = "golden";
  bool caet_check = false;
  auto* caet_cmd = app.add_subcommand("caet", "run the bundled emergency-team scenario");
  add_run_options(caet_cmd, caet_req);
  caet_cmd->add_flag("--check", caet_check, "run the behavioural checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kInput;
  }

  try {
    if (*run_cmd) return cmd_run(run_req);
    if (*validate_cmd) return cmd_validate(trace_path);
    if (*rmcs_cmd) {
      if (!rmcs_req.oracle && !rmcs_req.simulate && !rmcs_req.compare) {
        std::cerr << "error: rmcs needs --oracle, --simulate or --compare\n";
        return kInput;
      }
      return cmd_rmcs(rmcs_req);
    }
    if (*caet_cmd) return cmd_caet(caet_req, caet_check);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  }
  return kOk;
}
