#include "amcs/spec_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "amcs/formalisms.hpp"

namespace amcs {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

namespace {

struct PendingContext {
  Name name;
  SuitePtr suite;
  std::string semantics;
  ControllerPolicy controller;
  UpdatePolicy update;
  std::vector<OutputRule> rules;
  std::string kb_text;
  bool has_kb = false;
};

std::vector<std::string_view> words(std::string_view s) {
  std::vector<std::string_view> out;
  while (true) {
    s = trim(s);
    if (s.empty()) return out;
    auto sp = s.find_first_of(" \t");
    out.push_back(s.substr(0, sp));
    if (sp == std::string_view::npos) return out;
    s = s.substr(sp);
  }
}

}  // namespace

LoadedSystem parse_system(std::string_view text, const SuiteResolver& suites) {
  LoadedSystem sys;
  std::vector<PendingContext> pending;
  std::vector<std::string_view> lines;
  while (!text.empty()) {
    auto nl = text.find('\n');
    lines.push_back(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view() : text.substr(nl + 1);
  }

  for (std::size_t n = 0; n < lines.size(); ++n) {
    std::string_view line = trim(lines[n]);
    auto fail = [&](const std::string& msg) -> LoadError {
      return LoadError("line " + std::to_string(n + 1) + ": " + msg);
    };
    if (line.empty() || line.front() == '#') continue;
    try {
      auto w = words(line);
      std::string_view key = w[0];
      if (key == "stream") {
        if (w.size() != 2) throw fail("expected 'stream <name>'");
        sys.spec.output_streams.emplace_back(w[1]);
      } else if (key == "sensor") {
        if (w.size() != 4 || w[2] != "->") throw fail("expected 'sensor <name> -> <context>'");
        sys.spec.sensors.emplace_back(w[1]);
        sys.sensor_targets[std::string(w[1])] = std::string(w[3]);
      } else if (key == "context") {
        if (w.size() != 4) throw fail("expected 'context <name> <suite> <semantics>'");
        SuitePtr suite = suites(w[2]);
        if (!suite) throw fail("unknown suite '" + std::string(w[2]) + "'");
        PendingContext c;
        c.name = std::string(w[1]);
        c.suite = suite;
        c.semantics = std::string(w[3]);
        pending.push_back(std::move(c));
      } else {
        if (pending.empty()) throw fail("'" + std::string(key) + "' outside a context block");
        PendingContext& c = pending.back();
        std::string_view rest = trim(line.substr(key.size()));
        if (key == "controller") {
          c.controller = parse_controller_policy(rest);
        } else if (key == "consume") {
          std::size_t k = 0;
          auto [p, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), k);
          if (ec != std::errc() || p != rest.data() + rest.size() || k == 0)
            throw fail("consume needs a positive package count");
          c.update.max_packages = k;
        } else if (key == "forget") {
          c.update.forget.push_back(parse_forget(rest));
        } else if (key == "ignore") {
          c.update.ignore.push_back(parse_ignore(rest));
        } else if (key == "out") {
          c.rules.push_back(parse_output_rule(rest));
        } else if (key == "kb") {
          if (rest != "{") throw fail("expected 'kb {'");
          if (c.has_kb) throw fail("duplicate kb block");
          c.has_kb = true;
          for (++n; n < lines.size() && trim(lines[n]) != "}"; ++n) {
            c.kb_text += trim(lines[n]);
            c.kb_text += '\n';
          }
          if (n == lines.size()) throw fail("unterminated kb block");
        } else {
          throw fail("unknown directive '" + std::string(key) + "'");
        }
      }
    } catch (const LoadError&) {
      throw;
    } catch (const std::exception& e) {
      throw LoadError("line " + std::to_string(n + 1) + ": " + e.what());
    }
  }

  for (PendingContext& c : pending) {
    sys.spec.contexts.push_back({c.name, c.suite});
    ContextConfiguration cfg;
    try {
      cfg.kb = c.suite->parse_kb(c.kb_text);
    } catch (const std::exception& e) {
      throw LoadError("kb of context '" + c.name + "': " + e.what());
    }
    cfg.semantics = c.semantics;
    c.controller.ignore = c.update.ignore;
    cfg.management.controller = make_controller(c.controller);
    cfg.management.updater = make_append_updater(c.update);
    cfg.management.rules = make_rule_set(std::move(c.rules));
    sys.init.contexts.push_back(std::move(cfg));
  }
  sys.init.streams.resize(sys.spec.output_streams.size());
  for (const auto& [sensor, target] : sys.sensor_targets)
    if (sys.spec.context_index(target) < 0)
      throw LoadError("sensor '" + sensor + "' feeds unknown context '" + target + "'");
  return sys;
}

LoadedSystem load_system(const std::string& path, const SuiteResolver& suites) {
  return parse_system(read_file(path), suites);
}

std::vector<SensorEvent> parse_sensor_events(std::string_view text, const LoadedSystem& sys) {
  std::vector<SensorEvent> out;
  std::size_t n = 0;
  while (!text.empty()) {
    auto nl = text.find('\n');
    std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view() : text.substr(nl + 1);
    ++n;
    if (line.empty() || line.front() == '#') continue;
    auto fail = [&](const std::string& msg) {
      return LoadError("sensor line " + std::to_string(n) + ": " + msg);
    };
    auto info = line.find(" info=");
    if (!line.starts_with("t=") || info == std::string_view::npos)
      throw fail("expected 't=<tick> sensor=<name> info=<terms>'");
    auto head = words(line.substr(0, info));
    if (head.size() != 2 || !head[1].starts_with("sensor="))
      throw fail("expected 't=<tick> sensor=<name> info=<terms>'");
    SensorEvent e;
    std::string_view ts = head[0].substr(2);
    auto [p, ec] = std::from_chars(ts.data(), ts.data() + ts.size(), e.time);
    if (ec != std::errc() || p != ts.data() + ts.size()) throw fail("bad tick");
    std::string sensor(head[1].substr(7));
    auto it = sys.sensor_targets.find(sensor);
    if (it == sys.sensor_targets.end()) throw fail("unknown sensor '" + sensor + "'");
    e.target = it->second;
    try {
      e.package = DataPackage(sensor, parse_term_list(line.substr(info + 6), false));
    } catch (const SyntaxError& err) {
      throw fail(err.what());
    }
    if (!out.empty() && e.time < out.back().time) throw fail("events must be ordered by time");
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<SensorEvent> load_sensor_events(const std::string& path, const LoadedSystem& sys) {
  return parse_sensor_events(read_file(path), sys);
}

std::string render_sensor_event(const SensorEvent& e) {
  return "t=" + std::to_string(e.time) + " sensor=" + e.package.source +
         " info=" + render_term_list(e.package.infos);
}

}  // namespace amcs
