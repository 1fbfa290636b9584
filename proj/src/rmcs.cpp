#include "amcs/rmcs.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <optional>

#include "amcs/spec_io.hpp"

namespace amcs {

// --- parsing ---------------------------------------------------------------------

namespace {

struct PendingBridge {
  std::size_t line;
  std::string text;
};

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> out;
  while (!text.empty()) {
    auto nl = text.find('\n');
    out.push_back(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view() : text.substr(nl + 1);
  }
  return out;
}

int resolve_ref(std::string_view ref, const SimpleRMCS& m) {
  std::size_t idx = 0;
  auto [p, ec] = std::from_chars(ref.data(), ref.data() + ref.size(), idx);
  if (ec == std::errc() && p == ref.data() + ref.size()) {
    if (idx < 1 || idx > m.contexts.size())
      throw RmcsError("context index " + std::string(ref) + " out of range");
    return static_cast<int>(idx - 1);
  }
  for (std::size_t i = 0; i < m.contexts.size(); ++i)
    if (m.contexts[i].name == ref) return static_cast<int>(i);
  if (std::find(m.sensors.begin(), m.sensors.end(), ref) != m.sensors.end()) return -1;
  throw RmcsError("unknown context or sensor '" + std::string(ref) + "'");
}

BridgeRule parse_bridge(std::string_view text, const SimpleRMCS& m) {
  text = trim(text);
  if (!text.empty() && text.back() == '.') text.remove_suffix(1);
  BridgeRule r;
  std::string_view body;
  auto arrow = text.find(":-");
  if (arrow != std::string_view::npos) body = text.substr(arrow + 2);
  r.head = parse_term(trim(text.substr(0, arrow)));
  if (trim(body).empty()) return r;
  for (std::string_view lit : split_top_level(body, ',')) {
    BridgeLiteral l;
    lit = trim(lit);
    if (lit.starts_with("not ") || lit.starts_with("not\t")) {
      l.negated = true;
      lit = trim(lit.substr(4));
    }
    auto colon = lit.find(':');
    if (lit.size() < 2 || lit.front() != '(' || lit.back() != ')' || colon == std::string_view::npos)
      throw RmcsError("bridge literal must read (ctx:atom): " + std::string(lit));
    std::string_view ref = trim(lit.substr(1, colon - 1));
    l.atom = parse_term(trim(lit.substr(colon + 1, lit.size() - colon - 2)));
    l.context = resolve_ref(ref, m);
    if (l.context < 0) l.sensor = std::string(ref);
    r.body.push_back(std::move(l));
  }
  return r;
}

}  // namespace

SimpleRMCS parse_rmcs(std::string_view text) {
  SimpleRMCS m;
  std::vector<std::string> kb_text;
  std::vector<std::vector<PendingBridge>> bridges;
  enum class Section { None, Kb, Bridge } section = Section::None;
  auto lines = split_lines(text);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    std::string_view line = trim(lines[n]);
    auto fail = [&](const std::string& msg) {
      return RmcsError("line " + std::to_string(n + 1) + ": " + msg);
    };
    if (line.empty() || line.front() == '#' || line.front() == '%') continue;
    if (line.starts_with("sensor ")) {
      m.sensors.emplace_back(trim(line.substr(7)));
      section = Section::None;
    } else if (line.starts_with("context ")) {
      m.contexts.push_back({std::string(trim(line.substr(8))), {}, {}});
      kb_text.emplace_back();
      bridges.emplace_back();
      section = Section::None;
    } else if (line == "kb:" || line == "bridge:") {
      if (m.contexts.empty()) throw fail("section outside a context");
      section = line == "kb:" ? Section::Kb : Section::Bridge;
    } else if (section == Section::Kb) {
      kb_text.back() += std::string(line) + "\n";
    } else if (section == Section::Bridge) {
      bridges.back().push_back({n + 1, std::string(line)});
    } else {
      throw fail("expected 'sensor', 'context', 'kb:' or 'bridge:'");
    }
  }
  for (std::size_t i = 0; i < m.contexts.size(); ++i) {
    try {
      m.contexts[i].kb = parse_program(kb_text[i]);
    } catch (const std::exception& e) {
      throw RmcsError("kb of context '" + m.contexts[i].name + "': " + e.what());
    }
    for (const PendingBridge& b : bridges[i]) {
      try {
        m.contexts[i].bridge.push_back(parse_bridge(b.text, m));
      } catch (const std::exception& e) {
        throw RmcsError("line " + std::to_string(b.line) + ": " + e.what());
      }
    }
  }
  check_rmcs(m);
  return m;
}

SimpleRMCS load_rmcs(const std::string& path) { return parse_rmcs(read_file(path)); }

void check_rmcs(const SimpleRMCS& m) {
  std::set<Name> names;
  auto add_name = [&](const Name& n) {
    if (!is_valid_name(n)) throw RmcsError("invalid name '" + n + "'");
    if (!names.insert(n).second) throw RmcsError("duplicate name '" + n + "'");
  };
  for (const Name& s : m.sensors) add_name(s);
  for (const RmcsContext& c : m.contexts) add_name(c.name);
  for (const RmcsContext& c : m.contexts) {
    if (!c.kb.choices.empty()) throw RmcsError("context '" + c.name + "' has choice groups");
    try {
      check_program(c.kb);
    } catch (const ProgramError& e) {
      throw RmcsError("context '" + c.name + "': " + e.what());
    }
    for (const BridgeRule& r : c.bridge) {
      if (!r.head.is_ground() || is_eoc(r.head))
        throw RmcsError("context '" + c.name + "': bad bridge head " + render_term(r.head));
      for (const BridgeLiteral& l : r.body) {
        if (!l.atom.is_ground())
          throw RmcsError("context '" + c.name + "': bridge literal " + render_term(l.atom) +
                          " is not ground");
        if (l.context >= static_cast<int>(m.contexts.size()) ||
            (l.context < 0 &&
             std::find(m.sensors.begin(), m.sensors.end(), l.sensor) == m.sensors.end()))
          throw RmcsError("context '" + c.name + "': bridge literal refers to nothing");
      }
    }
  }
}

std::string render_rmcs(const SimpleRMCS& m) {
  std::string out;
  for (const Name& s : m.sensors) out += "sensor " + s + "\n";
  for (const RmcsContext& c : m.contexts) {
    out += "context " + c.name + "\nkb:\n";
    std::string kb = c.kb.render();
    for (std::string_view line : split_lines(kb))
      if (!trim(line).empty()) out += "  " + std::string(trim(line)) + "\n";
    out += "bridge:\n";
    for (const BridgeRule& r : c.bridge) {
      out += "  " + render_term(r.head);
      for (std::size_t k = 0; k < r.body.size(); ++k) {
        const BridgeLiteral& l = r.body[k];
        out += k == 0 ? " :- " : ", ";
        if (l.negated) out += "not ";
        out += "(" + (l.context < 0 ? l.sensor : m.contexts[l.context].name) + ":" +
               render_term(l.atom) + ")";
      }
      out += ".\n";
    }
  }
  return out;
}

// --- oracle ----------------------------------------------------------------------

std::set<Info> active_heads(const SimpleRMCS& m, std::size_t i, const EquilibriumCandidate& s,
                            const Observation& obs) {
  std::set<Info> out;
  for (const BridgeRule& r : m.contexts[i].bridge) {
    bool holds = std::all_of(r.body.begin(), r.body.end(), [&](const BridgeLiteral& l) {
      bool in;
      if (l.context >= 0) {
        in = s[l.context].contains(l.atom);
      } else {
        auto it = obs.find(l.sensor);
        in = it != obs.end() && it->second.contains(l.atom);
      }
      return in != l.negated;
    });
    if (holds) out.insert(r.head);
  }
  return out;
}

namespace {

std::vector<Info> bridge_heads(const RmcsContext& c) {
  std::set<Info> heads;
  for (const BridgeRule& r : c.bridge) heads.insert(r.head);
  return {heads.begin(), heads.end()};
}

BeliefSet model_with(const RuleKB& kb, const std::set<Info>& heads) {
  RuleKB p = kb;
  p.facts.insert(heads.begin(), heads.end());
  return perfect_model(p);
}

}  // namespace

std::vector<BeliefSet> candidate_belief_sets(const SimpleRMCS& m, std::size_t i) {
  const RmcsContext& c = m.contexts[i];
  std::vector<Info> heads = bridge_heads(c);
  if (heads.size() > kMaxUniverse)
    throw UniverseTooLarge("context '" + c.name + "' has " + std::to_string(heads.size()) +
                           " distinct bridge heads");
  std::set<BeliefSet> out;
  for (std::size_t mask = 0; mask < (std::size_t{1} << heads.size()); ++mask) {
    std::set<Info> h;
    for (std::size_t k = 0; k < heads.size(); ++k)
      if (mask >> k & 1) h.insert(heads[k]);
    out.insert(model_with(c.kb, h));
  }
  return {out.begin(), out.end()};
}

namespace {

std::vector<std::vector<BeliefSet>> all_candidates(const SimpleRMCS& m) {
  std::vector<std::vector<BeliefSet>> cands;
  std::size_t universe = 0;
  for (std::size_t i = 0; i < m.contexts.size(); ++i) {
    cands.push_back(candidate_belief_sets(m, i));
    std::set<Info> atoms;
    for (const BeliefSet& s : cands.back()) atoms.insert(s.begin(), s.end());
    universe += atoms.size();
    if (universe > kMaxUniverse)
      throw UniverseTooLarge("atom universe exceeds " + std::to_string(kMaxUniverse) + " atoms");
  }
  return cands;
}

}  // namespace

std::set<EquilibriumCandidate> brute_force_equilibria(const SimpleRMCS& m, const Observation& obs) {
  check_rmcs(m);
  auto cands = all_candidates(m);
  std::size_t n = m.contexts.size();
  std::set<EquilibriumCandidate> out;
  std::vector<std::map<std::set<Info>, BeliefSet>> cache(n);
  std::vector<std::size_t> pick(n, 0);
  while (true) {
    EquilibriumCandidate s(n);
    for (std::size_t i = 0; i < n; ++i) s[i] = cands[i][pick[i]];
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) {
      std::set<Info> heads = active_heads(m, i, s, obs);
      auto it = cache[i].find(heads);
      if (it == cache[i].end()) it = cache[i].emplace(heads, model_with(m.contexts[i].kb, heads)).first;
      ok = it->second == s[i];
    }
    if (ok) out.insert(std::move(s));
    std::size_t k = n;
    while (k > 0 && ++pick[k - 1] == cands[k - 1].size()) pick[--k] = 0;
    if (k == 0) break;
  }
  return out;
}

std::string render_candidate(const EquilibriumCandidate& c) {
  std::string out = "(";
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (i) out += ", ";
    out += render_belief_set(c[i]);
  }
  return out + ")";
}

// --- simulation ------------------------------------------------------------------

namespace {

const Term& var_n() {
  static const Term t = Term::variable("N");
  return t;
}
const Term& var_k() {
  static const Term t = Term::variable("K");
  return t;
}

Term sym(const std::string& s) { return Term::symbol(s); }
Term num(std::size_t i) { return Term::symbol(std::to_string(i)); }
Term var(const std::string& s) { return Term::variable(s); }
Term fn(const std::string& f, std::vector<Term> args) { return Term::compound(f, std::move(args)); }

OutputRule out_rule(const std::string& text) { return parse_output_rule(text); }

/// Renames variables X to VX so that N and K stay free for the round and
/// candidate.
Term rename(const Term& t) {
  if (t.is_variable()) return t.is_anonymous() ? t : var("V" + t.name());
  if (!t.is_compound()) return t;
  std::vector<Term> args;
  for (const Term& a : t.args()) args.push_back(rename(a));
  return fn(t.name(), std::move(args));
}

Term reify(const Term& atom) {
  std::vector<Term> args{var_n(), var_k()};
  for (const Term& a : atom.args()) args.push_back(rename(a));
  return fn("r_" + atom.name(), std::move(args));
}

Term reify_literal(const Term& lit) { return is_builtin(lit) ? rename(lit) : reify(lit); }

/// (name, arity) of every atom context i can believe.
std::set<std::pair<std::string, std::size_t>> signatures(const RmcsContext& c) {
  std::set<std::pair<std::string, std::size_t>> out;
  for (const Info& f : c.kb.facts) out.emplace(f.name(), f.arity());
  for (const Rule& r : c.kb.rules) out.emplace(r.head.name(), r.head.arity());
  for (const BridgeRule& r : c.bridge) out.emplace(r.head.name(), r.head.arity());
  return out;
}

/// Evaluates kb_i extended by the bridge heads of every candidate at once:
/// atom p(X) of candidate K in round N becomes r_p(N,K,X).
Program kbp_program(const RmcsContext& c) {
  Program p;
  Term cand = fn("cand", {var_n(), var_k()});
  for (const Info& f : c.kb.facts) p.rules.push_back({reify(f), {cand}, {}});
  for (const Rule& r : c.kb.rules) {
    Rule q{reify(r.head), {cand}, {}};
    for (const Term& l : r.pos) q.pos.push_back(reify_literal(l));
    for (const Term& l : r.neg) q.neg.push_back(reify_literal(l));
    p.rules.push_back(std::move(q));
  }
  for (const Info& h : bridge_heads(c)) {
    p.rules.push_back({reify(h), {fn("upd", {var_n(), var_k(), h})}, {}});
    p.rules.push_back({reify(h), {cand, fn("base", {h})}, {}});
  }
  check_program(p);
  return p;
}

std::vector<OutputRule> kbp_rules(const RmcsContext& c, std::size_t index) {
  // Keeps check a stakeholder, and so an eoc receiver, when c believes nothing.
  std::vector<OutputRule> rules{out_rule("check: cand(N,K) :- cand(N,K).")};
  for (const auto& [name, arity] : signatures(c)) {
    std::vector<Term> xs;
    for (std::size_t k = 0; k < arity; ++k) xs.push_back(var("X" + std::to_string(k + 1)));
    std::vector<Term> rargs{var_n(), var_k()};
    rargs.insert(rargs.end(), xs.begin(), xs.end());
    Term atom = arity == 0 ? sym(name) : fn(name, xs);
    rules.push_back({"check", fn("res", {var_n(), var_k(), num(index), atom}), {fn("r_" + name, rargs)}, {}});
  }
  return rules;
}

/// Bridge rules of context i as upd(N,K,Head) over the candidates and the
/// round's observation.
Program m_program(const SimpleRMCS& m, std::size_t i) {
  Program p;
  p.rules.push_back(parse_rule("done(N) :- success(N,K)."));
  p.rules.push_back(parse_rule("commit(H) :- success(N,K), upd(N,K,H)."));
  for (const BridgeRule& br : m.contexts[i].bridge) {
    Rule r{fn("upd", {var_n(), var_k(), br.head}), {fn("cand", {var_n(), var_k()})}, {}};
    for (const BridgeLiteral& l : br.body) {
      Term lit = l.context >= 0 ? fn("in", {var_n(), var_k(), num(l.context + 1), l.atom})
                                : fn("sensed", {var_n(), sym(l.sensor), l.atom});
      (l.negated ? r.neg : r.pos).push_back(lit);
    }
    p.rules.push_back(std::move(r));
  }
  check_program(p);
  return p;
}

/// Guess: one choice group per context over its candidate belief sets.
Program guess_program(const std::vector<std::vector<BeliefSet>>& cands) {
  Program p;
  std::vector<Term> picks;
  std::vector<Term> body{fn("round", {var_n()})};
  for (std::size_t i = 0; i < cands.size(); ++i) {
    std::vector<Info> group;
    for (std::size_t j = 0; j < cands[i].size(); ++j) {
      group.push_back(fn("pick", {num(i + 1), num(j)}));
      for (const Belief& a : cands[i][j]) p.facts.insert(fn("mem", {num(i + 1), num(j), a}));
    }
    p.choices.push_back(std::move(group));
    Term j = var("J" + std::to_string(i + 1));
    picks.push_back(j);
    body.push_back(fn("pick", {num(i + 1), j}));
  }
  Term id = picks.empty() ? sym("k") : fn("k", picks);
  p.rules.push_back({fn("cand", {var_n(), id}), body, {}});
  p.rules.push_back(parse_rule("in(N,K,I,A) :- cand(N,K), pick(I,J), mem(I,J,A)."));
  check_program(p);
  return p;
}

bool is_pred(const Term& t, std::string_view name, std::size_t arity) {
  return t.name() == name && t.arity() == arity;
}

std::optional<long long> current_round(const Program& p) {
  std::optional<long long> out;
  for (const Info& f : p.facts)
    if (is_pred(f, "round", 1) && f.arg(0).is_integer())
      out = std::max(out.value_or(f.arg(0).as_integer()), f.arg(0).as_integer());
  return out;
}

const Program& facts_or_empty(const KnowledgeBase& kb) {
  static const Program empty;
  const Program* p = kb.as<Program>();
  return p ? *p : empty;
}

/// obs: queues sensor packages as queued(S,A) and releases all of them as
/// round N+1 once success(N,_) arrived from check.
Updater obs_updater(std::set<Name> sensors) {
  return [sensors = std::move(sensors)](const InformationBuffer& ib, const KnowledgeBase& kb,
                                        const ContextConfiguration& current) {
    Program next = program_of(kb);
    const Term pending = sym("pending");
    next.facts.erase(sym("fresh"));
    for (std::size_t k = 0; k < ib.size(); ++k) {
      const DataPackage& pkg = ib[k];
      if (sensors.contains(pkg.source)) {
        next.facts.insert(pending);
        for (const Info& a : pkg.infos)
          if (!is_eoc(a)) next.facts.insert(fn("queued", {sym(pkg.source), a}));
      } else {
        for (const Info& a : pkg.infos)
          if (is_pred(a, "success", 2)) next.facts.insert(fn("success", {a.arg(0)}));
      }
    }
    auto cur = current_round(next);
    bool release = !cur || (next.facts.contains(fn("success", {num(*cur)})) &&
                            next.facts.contains(pending));
    if (release) {
      Term round = num(cur ? *cur + 1 : 1);
      std::set<Info> facts;
      for (const Info& f : next.facts) {
        if (is_pred(f, "queued", 2)) facts.insert(fn("sensed", {round, f.arg(0), f.arg(1)}));
        else if (!is_pred(f, "round", 1) && !is_pred(f, "sensed", 3) && f != pending)
          facts.insert(f);
      }
      facts.insert(fn("round", {round}));
      facts.insert(sym("fresh"));
      next.facts = std::move(facts);
    }
    ContextConfiguration out = current;
    out.kb = next == program_of(kb) ? kb : make_kb(kb.formalism(), std::move(next));
    out.buffer = ib.drop_front(ib.size());
    return out;
  };
}

Controller obs_controller(std::set<Name> sensors) {
  return [sensors = std::move(sensors)](const KnowledgeBase& kb, const InformationBuffer& ib) {
    const Program& p = facts_or_empty(kb);
    auto cur = current_round(p);
    if (!cur) return true;
    for (std::size_t k = 0; k < ib.size(); ++k) {
      if (sensors.contains(ib[k].source)) return true;
      for (const Info& a : ib[k].infos)
        if (is_pred(a, "success", 2) && a.arg(0) == num(*cur) &&
            !p.facts.contains(fn("success", {a.arg(0)})))
          return true;
    }
    return false;
  };
}

/// m_i consumes the candidates of a round in one update: everything up to the
/// last end-of-computation marker from guess, or the packages before a
/// partially delivered round.
std::size_t m_consumable(const InformationBuffer& ib) {
  std::optional<std::size_t> first, last_eoc;
  for (std::size_t k = 0; k < ib.size(); ++k) {
    if (ib[k].source != "guess") continue;
    if (!first) first = k;
    if (ib[k].contains_eoc()) last_eoc = k;
  }
  if (last_eoc) return *last_eoc + 1;
  return first.value_or(ib.size());
}

Controller m_controller() {
  return [](const KnowledgeBase& kb, const InformationBuffer& ib) {
    const Program& p = facts_or_empty(kb);
    std::size_t take = m_consumable(ib);
    for (std::size_t k = 0; k < take; ++k) {
      if (ib[k].source == "guess") {
        if (ib[k].contains_eoc()) return true;
        continue;
      }
      if (ib[k].source == "obs") continue;
      for (const Info& a : ib[k].infos)
        if (!is_eoc(a) && !p.facts.contains(a)) return true;
    }
    return false;
  };
}

Updater m_updater() {
  UpdatePolicy policy;
  policy.forget.push_back(parse_forget("in(_,_,_,_) on cand(_,_)"));
  policy.forget.push_back(parse_forget("cand(_,_) on cand(_,_)"));
  return [policy](const InformationBuffer& ib, const KnowledgeBase& kb,
                  const ContextConfiguration& current) {
    UpdatePolicy p = policy;
    p.max_packages = m_consumable(ib);
    return updater_append_facts(ib, kb, current, p);
  };
}

ContextConfiguration configure(KnowledgeBase kb, std::string semantics, Controller c, Updater u,
                               std::vector<OutputRule> rules) {
  ContextConfiguration cfg;
  cfg.kb = std::move(kb);
  cfg.semantics = std::move(semantics);
  cfg.management.controller = std::move(c);
  cfg.management.updater = std::move(u);
  cfg.management.rules = make_rule_set(std::move(rules));
  return cfg;
}

ControllerPolicy policy_of(std::string_view text) { return parse_controller_policy(text); }

std::vector<BeliefSet> confirm_semantics(const KnowledgeBase& kb) {
  const Program& p = program_of(kb);
  std::optional<Term> round;
  for (const Info& f : p.facts)
    if (is_pred(f, "cand", 2) && (!round || *round < f.arg(0))) round = f.arg(0);
  if (!round) return {BeliefSet{}};
  // per candidate: context -> (guessed, computed)
  std::map<Term, std::map<Term, std::pair<BeliefSet, BeliefSet>>> table;
  for (const Info& f : p.facts) {
    if (f.arity() == 0 || f.arg(0) != *round) continue;
    if (is_pred(f, "cand", 2)) table[f.arg(1)];
    else if (is_pred(f, "in", 4)) table[f.arg(1)][f.arg(2)].first.insert(f.arg(3));
    else if (is_pred(f, "res", 4)) table[f.arg(1)][f.arg(2)].second.insert(f.arg(3));
  }
  std::vector<Term> confirmed;
  for (const auto& [k, ctxs] : table)
    if (std::all_of(ctxs.begin(), ctxs.end(), [](const auto& e) { return e.second.first == e.second.second; }))
      confirmed.push_back(k);
  if (confirmed.empty()) return {BeliefSet{fn("retry", {*round})}};
  Term success = fn("success", {*round, confirmed.front()});
  std::vector<BeliefSet> out;
  for (const Term& k : confirmed) {
    BeliefSet s{success, fn("eq", {*round, k})};
    for (const auto& [i, sets] : table[k])
      for (const Belief& a : sets.first) s.insert(fn("sel", {i, a}));
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

SuitePtr rmcs_check_suite() {
  static const SuitePtr s = [] {
    auto suite = std::make_shared<LogicSuite>();
    suite->tag = "rmcs_check";
    suite->admissible = [](const KnowledgeBase& kb) {
      const Program* p = kb.as<Program>();
      return kb.formalism() == "rmcs_check" && p && p->rules.empty() && p->choices.empty();
    };
    suite->semantics = {{"confirm", confirm_semantics}};
    suite->parse_kb = [](std::string_view text) { return make_kb("rmcs_check", parse_program(text)); };
    return SuitePtr(suite);
  }();
  return s;
}

Simulation build_simulation(const SimpleRMCS& m, const Observation& initial) {
  check_rmcs(m);
  auto cands = all_candidates(m);
  Simulation sim;
  sim.candidates = 1;
  for (const auto& c : cands) sim.candidates *= c.size();
  AMCSSpec& spec = sim.spec;
  SystemConfiguration& init = sim.init;
  std::size_t n = m.contexts.size();
  std::set<Name> sensors(m.sensors.begin(), m.sensors.end());
  for (const auto& [s, infos] : initial)
    if (!sensors.contains(s)) throw RmcsError("observation for unknown sensor '" + s + "'");

  std::vector<Name> m_names;
  ControllerPolicy novel = policy_of("novel_info");
  for (std::size_t i = 0; i < n; ++i) {
    const RmcsContext& c = m.contexts[i];
    Name kb = "kb_" + c.name, kbp = "kbp_" + c.name, mi = "m_" + c.name;
    m_names.push_back(mi);
    spec.contexts.push_back({kb, rule_suite()});
    init.contexts.push_back(configure(make_kb(kRuleSuite, c.kb), "perfect", make_controller(novel),
                                      make_append_updater({}), {}));

    UpdatePolicy kbp_update;
    kbp_update.forget.push_back(parse_forget("cand(_,_) on cand(_,_)"));
    kbp_update.forget.push_back(parse_forget("upd(_,_,_) on cand(_,_)"));
    spec.contexts.push_back({kbp, rule_suite()});
    init.contexts.push_back(configure(make_kb(kRuleSuite, kbp_program(c)), "perfect",
                                      make_controller(novel), make_append_updater(kbp_update),
                                      kbp_rules(c, i + 1)));

    spec.contexts.push_back({mi, rule_suite()});
    init.contexts.push_back(configure(
        make_kb(kRuleSuite, m_program(m, i)), "perfect", m_controller(), m_updater(),
        {out_rule(kbp + ": cand(N,K) :- cand(N,K), not done(N)."),
         out_rule(kbp + ": upd(N,K,H) :- upd(N,K,H), not done(N)."),
         out_rule(kbp + ": base(H) :- committed(H), cand(N,_), not done(N)."),
         out_rule(kb + ": H :- commit(H), not committed(H)."),
         out_rule(mi + ": committed(H) :- commit(H).")}));
  }

  // obs
  // Only the update that releases a round announces it; later computations
  // of the same round (new sensor data queued) stay silent.
  std::vector<OutputRule> obs_rules{out_rule("guess: round(N) :- round(N), fresh.")};
  for (const Name& mi : m_names)
    obs_rules.push_back(out_rule(mi + ": sensed(N,S,A) :- round(N), sensed(N,S,A), fresh."));
  spec.contexts.push_back({"obs", fact_suite()});
  ContextConfiguration obs = configure(make_kb(kFactSuite, Program{}), "identity",
                                       obs_controller(sensors), obs_updater(sensors),
                                       std::move(obs_rules));
  for (const Name& s : m.sensors)
    if (auto it = initial.find(s); it != initial.end())
      obs.buffer.append(DataPackage(s, it->second));
  init.contexts.push_back(std::move(obs));

  // guess
  UpdatePolicy guess_update;
  guess_update.forget.push_back(parse_forget("round(_) on round(_)"));
  guess_update.ignore.push_back(parse_ignore("retry(N) if round(N)"));
  ControllerPolicy guess_control = novel;
  guess_control.ignore = guess_update.ignore;
  std::vector<OutputRule> guess_rules{out_rule("check: cand(N,K) :- cand(N,K)."),
                                      out_rule("check: in(N,K,I,A) :- in(N,K,I,A).")};
  for (const Name& mi : m_names) {
    guess_rules.push_back(out_rule(mi + ": cand(N,K) :- cand(N,K)."));
    guess_rules.push_back(out_rule(mi + ": in(N,K,I,A) :- in(N,K,I,A)."));
  }
  spec.contexts.push_back({"guess", choice_suite()});
  init.contexts.push_back(configure(make_kb(kChoiceSuite, guess_program(cands)), "all",
                                    make_controller(guess_control),
                                    make_append_updater(guess_update), std::move(guess_rules)));

  // check
  ControllerPolicy wait;
  wait.kind = ControllerPolicy::Kind::WaitForEoc;
  wait.sources.insert("guess");
  for (const RmcsContext& c : m.contexts) wait.sources.insert("kbp_" + c.name);
  UpdatePolicy check_update;
  check_update.forget.push_back({Term::variable("_"), std::nullopt});
  std::vector<OutputRule> check_rules{
      out_rule(std::string(kEquilibriaStream) + ": eq(N) :- eq(N,K)."),
      out_rule(std::string(kEquilibriaStream) + ": in(I,A) :- sel(I,A)."),
      out_rule("obs: success(N,K) :- success(N,K)."),
      out_rule("guess: retry(N) :- retry(N).")};
  for (const Name& mi : m_names) check_rules.push_back(out_rule(mi + ": success(N,K) :- success(N,K)."));
  spec.contexts.push_back({"check", rmcs_check_suite()});
  init.contexts.push_back(configure(make_kb("rmcs_check", Program{}), "confirm",
                                    make_controller(wait), make_append_updater(check_update),
                                    std::move(check_rules)));

  spec.output_streams.emplace_back(kEquilibriaStream);
  spec.sensors = m.sensors;
  init.streams.resize(1);
  if (auto v = validate_system(spec, init); !v.empty()) throw SpecError(std::move(v));
  return sim;
}

Tick simulation_horizon(const Simulation& sim, Tick max_latency, int rounds) {
  Tick per_round = (2 * static_cast<Tick>(sim.candidates) + 10) * (max_latency + 1) + 20;
  return per_round * std::max(rounds, 1);
}

std::size_t simulated_contexts(const AMCSSpec& spec) {
  if (spec.contexts.size() < 3 || spec.contexts.size() % 3 != 0 ||
      spec.stream_index(kEquilibriaStream) < 0)
    throw RmcsError("not a simulation spec");
  return spec.contexts.size() / 3 - 1;
}

std::set<EquilibriumCandidate> extract_equilibria(const RunTrace& trace) {
  std::size_t n = simulated_contexts(trace.spec);
  std::set<EquilibriumCandidate> out;
  if (trace.snapshots.empty()) return out;
  const InformationBuffer& ob =
      trace.snapshots.back().streams[trace.spec.stream_index(kEquilibriaStream)];
  for (std::size_t p = 0; p < ob.size(); ++p) {
    const DataPackage& pkg = ob[p];
    if (pkg.infos.empty()) continue;
    EquilibriumCandidate c(n);
    bool marked = false;
    if (pkg.infos.size() == 1 && pkg.contains_eoc()) continue;
    for (const Info& a : pkg.infos) {
      if (is_pred(a, "eq", 1)) {
        marked = true;
      } else if (is_pred(a, "in", 2) && a.arg(0).is_integer() && a.arg(0).as_integer() >= 1 &&
                 static_cast<std::size_t>(a.arg(0).as_integer()) <= n) {
        c[a.arg(0).as_integer() - 1].insert(a.arg(1));
      } else {
        throw RmcsError("malformed info " + render_term(a) + " on the equilibria stream");
      }
    }
    if (!marked) throw RmcsError("package without eq/1 marker on the equilibria stream");
    out.insert(std::move(c));
  }
  return out;
}

}  // namespace amcs
