#include "amcs/trace_io.hpp"

#include <charconv>
#include <ostream>
#include <sstream>

namespace amcs {

namespace {

constexpr std::string_view kMagic = "amcs-trace 1";

/// Smallest D such that prev without its first D packages is a prefix of
/// cur; nullopt when cur does not continue any suffix of prev.
std::optional<std::size_t> delta_drop(const InformationBuffer& prev, const InformationBuffer& cur) {
  for (std::size_t d = 0; d <= prev.size(); ++d)
    if (prev.drop_front(d).is_prefix_of(cur)) return d;
  return std::nullopt;
}

void write_buffer_delta(std::ostream& out, std::string_view indent, const std::string& header,
                        const InformationBuffer* prev, const InformationBuffer& cur,
                        bool header_always) {
  std::size_t from = 0;
  std::string mode;
  if (prev) {
    auto d = delta_drop(*prev, cur);
    if (!d) {
      mode = " reset";
    } else {
      if (*d > 0) mode = " drop=" + std::to_string(*d);
      from = prev->size() - *d;
    }
  }
  bool any = from < cur.size();
  if (header_always || !mode.empty() || any) out << indent << header << mode << '\n';
  for (std::size_t p = from; p < cur.size(); ++p)
    out << indent << "  + " << render_package(cur[p]) << '\n';
}

bool rules_equal(const RuleSet& a, const RuleSet& b) {
  if (a == b) return true;
  std::size_t na = a ? a->size() : 0, nb = b ? b->size() : 0;
  if (na != nb) return false;
  for (std::size_t k = 0; k < na; ++k)
    if (!((*a)[k] == (*b)[k])) return false;
  return true;
}

void write_snapshot(std::ostream& out, const AMCSSpec& spec, const Snapshot& s,
                    const Snapshot* prev) {
  out << "snapshot t=" << s.time << '\n';
  for (std::size_t i = 0; i < s.contexts.size(); ++i) {
    const ContextSnapshot& c = s.contexts[i];
    const ContextSnapshot* p = prev ? &prev->contexts[i] : nullptr;
    out << "  ctx " << spec.contexts[i].name << " busy=" << c.busy << " waiting=" << c.waiting
        << " sem=" << c.semantics << '\n';
    if (!p || !(p->kb.same_object(c.kb) || p->kb == c.kb)) {
      out << "    kb\n";
      std::istringstream lines(c.kb.render());
      for (std::string line; std::getline(lines, line);)
        if (!line.empty()) out << "      " << line << '\n';
      out << "    end\n";
    }
    if (!p || !rules_equal(p->rules, c.rules)) {
      out << "    rules\n";
      for (const OutputRule& r : c.rule_span()) out << "      " << render_output_rule(r) << '\n';
      out << "    end\n";
    }
    write_buffer_delta(out, "    ", "ib", p ? &p->buffer : nullptr, c.buffer, false);
  }
  for (std::size_t j = 0; j < s.streams.size(); ++j)
    write_buffer_delta(out, "  ", "ob " + spec.output_streams[j], prev ? &prev->streams[j] : nullptr,
                       s.streams[j], false);
}

}  // namespace

std::string render_notification(const Notification& n) {
  std::string out = "t=" + std::to_string(n.time) + " kind=" + std::string(kind_name(n.kind)) +
                    " src=" + n.src + " dst=" + n.dst + " pkg=[";
  out += render_term_list(n.package.infos);
  out += ']';
  return out;
}

namespace {

/// Splits `key=value` fields separated by single spaces; values may contain
/// spaces only inside brackets.
std::vector<std::pair<std::string_view, std::string_view>> fields(std::string_view line) {
  std::vector<std::pair<std::string_view, std::string_view>> out;
  for (std::string_view f : split_top_level(line, ' ')) {
    if (f.empty()) continue;
    auto eq = f.find('=');
    if (eq == std::string_view::npos) out.emplace_back(f, std::string_view());
    else out.emplace_back(f.substr(0, eq), f.substr(eq + 1));
  }
  return out;
}

Tick to_tick(std::string_view s) {
  Tick v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw std::invalid_argument("bad tick '" + std::string(s) + "'");
  return v;
}

bool to_flag(std::string_view s) {
  if (s == "0") return false;
  if (s == "1") return true;
  throw std::invalid_argument("bad flag '" + std::string(s) + "'");
}

}  // namespace

Notification parse_notification(std::string_view line) {
  Notification n;
  bool has_t = false, has_kind = false, has_pkg = false;
  for (auto [k, v] : fields(line)) {
    if (k == "t") {
      n.time = to_tick(v);
      has_t = true;
    } else if (k == "kind") {
      auto kind = parse_kind(v);
      if (!kind) throw std::invalid_argument("unknown notification kind '" + std::string(v) + "'");
      n.kind = *kind;
      has_kind = true;
    } else if (k == "src") {
      n.src = std::string(v);
    } else if (k == "dst") {
      n.dst = std::string(v);
    } else if (k == "pkg") {
      if (v.size() < 2 || v.front() != '[' || v.back() != ']')
        throw std::invalid_argument("pkg must be a bracketed term list");
      n.package.infos = parse_term_list(v.substr(1, v.size() - 2), false);
      has_pkg = true;
    } else {
      throw std::invalid_argument("unknown field '" + std::string(k) + "'");
    }
  }
  if (!has_t || !has_kind || !has_pkg || n.src.empty() || n.dst.empty())
    throw std::invalid_argument("notification needs t, kind, src, dst and pkg");
  n.package = DataPackage(n.src, std::move(n.package.infos));
  return n;
}

void write_trace(std::ostream& out, const RunTrace& trace) {
  const AMCSSpec& spec = trace.spec;
  out << kMagic << '\n' << "system\n";
  for (const Context& c : spec.contexts)
    out << "  context " << c.name << ' ' << (c.suite ? c.suite->tag : std::string("?")) << '\n';
  for (const Name& s : spec.output_streams) out << "  stream " << s << '\n';
  for (const Name& s : spec.sensors) out << "  sensor " << s << '\n';
  out << "end\n";
  std::size_t k = 0;
  for (std::size_t t = 0; t < trace.snapshots.size(); ++t) {
    const Snapshot& s = trace.snapshots[t];
    while (k < trace.log.size() && trace.log[k].time <= s.time)
      out << render_notification(trace.log[k++]) << '\n';
    write_snapshot(out, spec, s, t ? &trace.snapshots[t - 1] : nullptr);
  }
  while (k < trace.log.size()) out << render_notification(trace.log[k++]) << '\n';
  if (trace.fault) {
    const RunFault& f = *trace.fault;
    out << "fault t=" << f.time << " ctx=" << (f.context.empty() ? "-" : f.context)
        << " condition=" << (f.condition ? condition_tag(*f.condition) : std::string_view("none"))
        << " msg=" << f.message << '\n';
  }
}

std::string trace_to_string(const RunTrace& trace) {
  std::ostringstream out;
  write_trace(out, trace);
  return out.str();
}

void write_log(std::ostream& out, const RunTrace& trace) {
  for (const Notification& n : trace.log) out << render_notification(n) << '\n';
  if (trace.fault)
    out << "fault t=" << trace.fault->time << " ctx="
        << (trace.fault->context.empty() ? "-" : trace.fault->context) << " msg="
        << trace.fault->message << '\n';
}

// --- parsing -------------------------------------------------------------------------

namespace {

class TraceParser {
 public:
  TraceParser(std::string_view text, const SuiteResolver& suites) : suites_(suites) {
    while (!text.empty()) {
      auto nl = text.find('\n');
      lines_.push_back(text.substr(0, nl));
      text = nl == std::string_view::npos ? std::string_view() : text.substr(nl + 1);
    }
  }

  RunTrace parse() {
    try {
      return parse_all();
    } catch (const TraceFormatError&) {
      throw;
    } catch (const std::exception& e) {
      throw TraceFormatError(pos_, e.what());
    }
  }

 private:
  RunTrace parse_all() {
    RunTrace trace;
    if (next_line() != kMagic) fail("expected '" + std::string(kMagic) + "'");
    if (next_line() != "system") fail("expected 'system'");
    while (true) {
      std::string_view l = trim(next_line());
      if (l == "end") break;
      auto f = split_top_level(l, ' ');
      if (f.size() == 3 && f[0] == "context") {
        SuitePtr suite = suites_(f[2]);
        if (!suite) fail("unknown suite '" + std::string(f[2]) + "'");
        trace.spec.contexts.push_back({std::string(f[1]), suite});
      } else if (f.size() == 2 && f[0] == "stream") {
        trace.spec.output_streams.emplace_back(f[1]);
      } else if (f.size() == 2 && f[0] == "sensor") {
        trace.spec.sensors.emplace_back(f[1]);
      } else {
        fail("bad system line");
      }
    }
    while (!at_end()) {
      std::string_view l = peek();
      if (l.empty()) {
        ++pos_;
        continue;
      }
      if (l.starts_with("t=")) {
        trace.log.push_back(parse_notification(next_line()));
      } else if (l.starts_with("snapshot ")) {
        parse_snapshot(trace);
      } else if (l.starts_with("fault ")) {
        trace.fault = parse_fault(next_line());
      } else {
        fail("unexpected line");
      }
    }
    return trace;
  }

  void parse_snapshot(RunTrace& trace) {
    auto f = fields(trim(next_line()).substr(9));
    if (f.size() != 1 || f[0].first != "t") fail("expected 'snapshot t=<tick>'");
    const AMCSSpec& spec = trace.spec;
    Snapshot s;
    s.time = to_tick(f[0].second);
    const Snapshot* prev = trace.snapshots.empty() ? nullptr : &trace.snapshots.back();
    if (prev) {
      s.contexts = prev->contexts;
      s.streams = prev->streams;
    } else {
      s.contexts.resize(spec.contexts.size());
      s.streams.resize(spec.output_streams.size());
    }
    for (std::size_t i = 0; i < spec.contexts.size(); ++i) {
      std::string_view l = trim(next_line());
      auto cf = fields(l);
      if (cf.size() != 5 || cf[0].first != "ctx" || cf[1].first != spec.contexts[i].name ||
          cf[2].first != "busy" || cf[3].first != "waiting" || cf[4].first != "sem")
        fail("expected 'ctx " + spec.contexts[i].name + " busy=.. waiting=.. sem=..'");
      ContextSnapshot& c = s.contexts[i];
      c.busy = to_flag(cf[2].second);
      c.waiting = to_flag(cf[3].second);
      c.semantics = std::string(cf[4].second);
      bool saw_kb = false, saw_rules = false;
      while (!at_end()) {
        std::string_view body = trim(peek());
        if (body == "kb") {
          ++pos_;
          std::string text = block();
          c.kb = spec.contexts[i].suite->parse_kb(text);
          saw_kb = true;
        } else if (body == "rules") {
          ++pos_;
          std::string text = block();
          std::vector<OutputRule> rules;
          std::istringstream in(text);
          for (std::string r; std::getline(in, r);)
            if (!trim(r).empty()) rules.push_back(parse_output_rule(r));
          c.rules = make_rule_set(std::move(rules));
          saw_rules = true;
        } else if (body.starts_with("ib")) {
          ++pos_;
          apply_header(c.buffer, body.substr(2));
          read_additions(c.buffer);
        } else if (body.starts_with("+ ")) {
          read_additions(c.buffer);
        } else {
          break;
        }
      }
      if (!prev && (!saw_kb || !saw_rules)) fail("first snapshot must list every kb and rule set");
    }
    while (!at_end() && trim(peek()).starts_with("ob ")) {
      std::string_view l = trim(next_line()).substr(3);
      auto sp = l.find(' ');
      std::string_view name = l.substr(0, sp);
      int j = spec.stream_index(name);
      if (j < 0) fail("unknown output stream '" + std::string(name) + "'");
      apply_header(s.streams[j], sp == std::string_view::npos ? std::string_view() : l.substr(sp));
      read_additions(s.streams[j]);
    }
    trace.snapshots.push_back(std::move(s));
  }

  void apply_header(InformationBuffer& b, std::string_view rest) {
    rest = trim(rest);
    if (rest.empty()) return;
    if (rest == "reset") {
      b = InformationBuffer();
      return;
    }
    if (!rest.starts_with("drop=")) fail("expected drop=<n> or reset");
    Tick d = to_tick(rest.substr(5));
    if (d < 0) fail("negative drop count");
    // An edited trace may drop more than it holds; the validator reports the
    // mismatch against the log.
    b = b.drop_front(std::min(static_cast<std::size_t>(d), b.size()));
  }

  void read_additions(InformationBuffer& b) {
    while (!at_end() && trim(peek()).starts_with("+ ")) {
      std::string_view l = trim(next_line());
      b.append(parse_package(l.substr(2)));
    }
  }

  /// Collects indented lines up to a line reading `end`.
  std::string block() {
    std::string text;
    while (true) {
      if (at_end()) fail("unterminated block");
      std::string_view l = trim(next_line());
      if (l == "end") return text;
      text += l;
      text += '\n';
    }
  }

  RunFault parse_fault(std::string_view line) {
    RunFault f;
    line = line.substr(6);
    auto msg = line.find(" msg=");
    if (msg == std::string_view::npos) fail("fault line needs msg=");
    f.message = std::string(line.substr(msg + 5));
    for (auto [k, v] : fields(line.substr(0, msg))) {
      if (k == "t") f.time = to_tick(v);
      else if (k == "ctx") f.context = v == "-" ? std::string() : std::string(v);
      else if (k == "condition") {
        for (Condition c : {Condition::I, Condition::II, Condition::III, Condition::IV,
                            Condition::V, Condition::Suffix, Condition::Def5})
          if (condition_tag(c) == v) f.condition = c;
      }
    }
    return f;
  }

  bool at_end() const { return pos_ >= lines_.size(); }
  std::string_view peek() const { return lines_[pos_]; }
  std::string_view next_line() {
    if (at_end()) fail("unexpected end of trace");
    return lines_[pos_++];
  }
  [[noreturn]] void fail(const std::string& msg) const { throw TraceFormatError(std::max<std::size_t>(pos_, 1), msg); }

  const SuiteResolver& suites_;
  std::vector<std::string_view> lines_;
  std::size_t pos_ = 0;
};

}  // namespace

RunTrace parse_trace(std::string_view text, const SuiteResolver& suites) {
  return TraceParser(text, suites).parse();
}

}  // namespace amcs
