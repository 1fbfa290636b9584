#include "amcs/formalisms.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>
#include <unordered_set>

namespace amcs {

// --- text form ------------------------------------------------------------------

std::string render_rule(const Rule& r) {
  std::string out = render_term(r.head);
  if (!r.pos.empty() || !r.neg.empty()) {
    out += " :- ";
    bool first = true;
    for (const Term& p : r.pos) {
      if (!first) out += ", ";
      first = false;
      render_term(p, out);
    }
    for (const Term& n : r.neg) {
      if (!first) out += ", ";
      first = false;
      out += "not ";
      render_term(n, out);
    }
  }
  out += '.';
  return out;
}

std::string Program::render() const {
  std::string out;
  for (const Info& f : facts) {
    render_term(f, out);
    out += ".\n";
  }
  for (const Rule& r : rules) {
    out += render_rule(r);
    out += '\n';
  }
  for (const auto& group : choices) {
    out += "choice {";
    for (std::size_t i = 0; i < group.size(); ++i) {
      if (i) out += "; ";
      render_term(group[i], out);
    }
    out += "}.\n";
  }
  return out;
}

bool Program::equals(const KbPayload& other) const {
  const auto* p = dynamic_cast<const Program*>(&other);
  return p && *this == *p;
}

Rule parse_rule(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.back() == '.') text.remove_suffix(1);
  Rule r;
  std::string_view head = text, body;
  if (auto arrow = text.find(":-"); arrow != std::string_view::npos) {
    head = text.substr(0, arrow);
    body = text.substr(arrow + 2);
  }
  r.head = parse_pattern(trim(head));
  if (!trim(body).empty()) {
    for (std::string_view lit : split_top_level(body, ',')) {
      if (lit.starts_with("not ") || lit.starts_with("not\t"))
        r.neg.push_back(parse_pattern(trim(lit.substr(4))));
      else
        r.pos.push_back(parse_pattern(lit));
    }
  }
  return r;
}

Program parse_program(std::string_view text) {
  Program p;
  std::size_t line_no = 0;
  while (!text.empty()) {
    auto nl = text.find('\n');
    std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view() : text.substr(nl + 1);
    ++line_no;
    if (line.empty() || line.front() == '%') continue;
    try {
      if (line.back() != '.') throw ProgramError("statement must end with '.'");
      if (line.starts_with("choice")) {
        auto open = line.find('{');
        auto close = line.rfind('}');
        if (open == std::string_view::npos || close == std::string_view::npos || close < open)
          throw ProgramError("malformed choice group");
        std::vector<Info> group;
        for (std::string_view alt : split_top_level(line.substr(open + 1, close - open - 1), ';'))
          group.push_back(parse_term(alt));
        if (group.empty()) throw ProgramError("empty choice group");
        p.choices.push_back(std::move(group));
        continue;
      }
      Rule r = parse_rule(line);
      if (r.pos.empty() && r.neg.empty() && r.head.is_ground())
        p.facts.insert(r.head);
      else
        p.rules.push_back(std::move(r));
    } catch (const SyntaxError& e) {
      throw ProgramError("line " + std::to_string(line_no) + ": " + e.what());
    } catch (const ProgramError& e) {
      throw ProgramError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  check_program(p);
  return p;
}

// --- analysis -------------------------------------------------------------------

namespace {

struct PredKey {
  std::string name;
  std::size_t arity;
  friend bool operator==(const PredKey&, const PredKey&) = default;
};

struct PredKeyHash {
  std::size_t operator()(const PredKey& k) const {
    return std::hash<std::string>{}(k.name) * 31 + k.arity;
  }
};

PredKey key_of(const Term& t) { return {t.name(), t.arity()}; }

bool builtin_holds(const Term& lit) {
  const Term& a = lit.arg(0);
  const Term& b = lit.arg(1);
  auto less = [](const Term& x, const Term& y) {
    if (x.is_integer() && y.is_integer()) return x.as_integer() < y.as_integer();
    return x < y;
  };
  if (lit.name() == "lt") return less(a, b);
  if (lit.name() == "le") return !less(b, a);
  return !(a == b);  // neq
}

/// Stratum per predicate, or nullopt when negation is cyclic.
std::optional<std::unordered_map<PredKey, int, PredKeyHash>> stratify(const Program& p) {
  std::unordered_map<PredKey, int, PredKeyHash> strat;
  for (const Rule& r : p.rules) {
    strat.emplace(key_of(r.head), 0);
    for (const Term& l : r.pos)
      if (!is_builtin(l)) strat.emplace(key_of(l), 0);
    for (const Term& l : r.neg) strat.emplace(key_of(l), 0);
  }
  const int limit = static_cast<int>(strat.size()) + 1;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const Rule& r : p.rules) {
      int& h = strat[key_of(r.head)];
      for (const Term& l : r.pos) {
        if (is_builtin(l)) continue;
        int s = strat[key_of(l)];
        if (s > h) {
          h = s;
          changed = true;
        }
      }
      for (const Term& l : r.neg) {
        int s = strat[key_of(l)] + 1;
        if (s > h) {
          h = s;
          changed = true;
        }
      }
      if (h > limit) return std::nullopt;
    }
  }
  return strat;
}

}  // namespace

bool is_builtin(const Term& literal) {
  return literal.arity() == 2 &&
         (literal.name() == "lt" || literal.name() == "le" || literal.name() == "neq");
}

void check_program(const Program& p) {
  for (const Rule& r : p.rules) {
    std::vector<std::string> bound;
    for (const Term& l : r.pos)
      if (!is_builtin(l)) collect_variables(l, bound);
    auto require = [&](const Term& t, const char* where) {
      std::vector<std::string> vars;
      collect_variables(t, vars);
      for (const auto& v : vars)
        if (std::find(bound.begin(), bound.end(), v) == bound.end())
          throw ProgramError("unsafe variable " + v + " in " + where + " of rule '" +
                             render_rule(r) + "'");
    };
    require(r.head, "head");
    if (r.head.is_variable()) throw ProgramError("rule head is a variable");
    for (const Term& l : r.neg) require(l, "negative literal");
    for (const Term& l : r.pos)
      if (is_builtin(l)) require(l, "builtin");
  }
  for (const auto& group : p.choices)
    if (group.empty()) throw ProgramError("empty choice group");
  if (!stratify(p)) throw ProgramError("negation is not stratified");
}

bool is_stratified(const Program& p) { return stratify(p).has_value(); }

// --- evaluation -------------------------------------------------------------------

namespace {

struct Relation {
  std::vector<Term> rows;
  std::unordered_set<Term, TermHash> set;
  std::unordered_map<Term, std::vector<std::uint32_t>, TermHash> by_first;

  bool insert(const Term& t) {
    if (!set.insert(t).second) return false;
    if (t.arity() > 0) by_first[t.arg(0)].push_back(static_cast<std::uint32_t>(rows.size()));
    rows.push_back(t);
    return true;
  }
};

class Database {
 public:
  Relation& rel(const PredKey& k) { return rels_[k]; }
  const Relation* find(const PredKey& k) const {
    auto it = rels_.find(k);
    return it == rels_.end() ? nullptr : &it->second;
  }
  bool insert(const Term& t) { return rels_[key_of(t)].insert(t); }

  BeliefSet to_belief_set() const {
    BeliefSet out;
    for (const auto& [k, r] : rels_) out.insert(r.rows.begin(), r.rows.end());
    return out;
  }

 private:
  std::unordered_map<PredKey, Relation, PredKeyHash> rels_;
};

/// Enumerates rows of `r` that can match `p` (already substituted), optionally
/// restricted to the row window [lo, hi).
template <class F>
void for_each_row(const Relation& r, const Term& p, std::size_t lo, std::size_t hi, F&& f) {
  if (p.is_ground()) {
    if (lo == 0 && hi >= r.rows.size()) {
      if (r.set.contains(p)) f(p);
      return;
    }
  }
  if (p.arity() > 0 && p.arg(0).is_ground()) {
    auto it = r.by_first.find(p.arg(0));
    if (it == r.by_first.end()) return;
    const auto& idx = it->second;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      std::uint32_t row = idx[i];
      if (row >= lo && row < hi) f(r.rows[row]);
    }
    return;
  }
  for (std::size_t i = lo; i < hi && i < r.rows.size(); ++i) f(r.rows[i]);
}

struct Step {
  enum Kind { Pos, Neg, Builtin } kind;
  std::size_t literal;  // index into pos or neg
};

class RuleEvaluator {
 public:
  RuleEvaluator(const Rule& r, Database& db) : rule_(r), db_(db) {}

  /// Plan with positive literal `delta` (or none) first, then greedily by
  /// bound arguments; negations and builtins as soon as their variables are
  /// bound.
  void plan(std::optional<std::size_t> delta) {
    steps_.clear();
    std::vector<std::string> bound;
    std::vector<bool> used_pos(rule_.pos.size()), used_neg(rule_.neg.size());
    auto vars_of = [](const Term& t) {
      std::vector<std::string> v;
      collect_variables(t, v);
      return v;
    };
    auto all_bound = [&](const Term& t) {
      for (const auto& v : vars_of(t))
        if (std::find(bound.begin(), bound.end(), v) == bound.end()) return false;
      return true;
    };
    auto take_pos = [&](std::size_t i) {
      used_pos[i] = true;
      steps_.push_back({is_builtin(rule_.pos[i]) ? Step::Builtin : Step::Pos, i});
      for (const auto& v : vars_of(rule_.pos[i]))
        if (std::find(bound.begin(), bound.end(), v) == bound.end()) bound.push_back(v);
    };
    auto flush_filters = [&] {
      for (std::size_t i = 0; i < rule_.pos.size(); ++i)
        if (!used_pos[i] && is_builtin(rule_.pos[i]) && all_bound(rule_.pos[i])) take_pos(i);
      for (std::size_t i = 0; i < rule_.neg.size(); ++i) {
        if (used_neg[i]) continue;
        if (all_bound(rule_.neg[i])) {
          used_neg[i] = true;
          steps_.push_back({Step::Neg, i});
        }
      }
    };
    if (delta) take_pos(*delta);
    flush_filters();
    while (true) {
      int best = -1, best_score = -1;
      for (std::size_t i = 0; i < rule_.pos.size(); ++i) {
        if (used_pos[i] || is_builtin(rule_.pos[i])) continue;
        const Term& l = rule_.pos[i];
        int score = 0;
        if (all_bound(l)) score = 3;
        else if (l.arity() > 0 && all_bound(l.arg(0))) score = 2;
        else if (!vars_of(l).empty() && std::any_of(bound.begin(), bound.end(), [&](const auto& v) {
                   auto vl = vars_of(l);
                   return std::find(vl.begin(), vl.end(), v) != vl.end();
                 }))
          score = 1;
        if (score > best_score) {
          best_score = score;
          best = static_cast<int>(i);
        }
      }
      if (best < 0) break;
      take_pos(static_cast<std::size_t>(best));
      flush_filters();
    }
    // Remaining builtins/negations (only reachable for unsafe rules).
    for (std::size_t i = 0; i < rule_.pos.size(); ++i)
      if (!used_pos[i]) take_pos(i);
    for (std::size_t i = 0; i < rule_.neg.size(); ++i)
      if (!used_neg[i]) steps_.push_back({Step::Neg, i});
    delta_ = delta;
  }

  /// Evaluates the plan; the delta literal ranges over rows [lo, hi).
  void run(std::size_t lo, std::size_t hi, std::vector<Term>& derived) {
    lo_ = lo;
    hi_ = hi;
    Bindings b;
    eval(0, b, derived);
  }

 private:
  void eval(std::size_t i, Bindings& b, std::vector<Term>& derived) {
    if (i == steps_.size()) {
      derived.push_back(substitute(rule_.head, b));
      return;
    }
    const Step& s = steps_[i];
    if (s.kind == Step::Builtin) {
      Term lit = substitute(rule_.pos[s.literal], b);
      if (lit.is_ground() && builtin_holds(lit)) eval(i + 1, b, derived);
      return;
    }
    if (s.kind == Step::Neg) {
      Term lit = substitute(rule_.neg[s.literal], b);
      const Relation* r = db_.find(key_of(lit));
      bool found = false;
      if (r) {
        if (lit.is_ground()) {
          found = r->set.contains(lit);
        } else {
          Bindings tmp = b;
          for_each_row(*r, lit, 0, r->rows.size(), [&](const Term& row) {
            if (!found && match(lit, row, tmp)) found = true;
          });
        }
      }
      if (!found) eval(i + 1, b, derived);
      return;
    }
    Term lit = substitute(rule_.pos[s.literal], b);
    if (lit.is_variable()) return;
    const Relation* r = db_.find(key_of(lit));
    if (!r) return;
    bool is_delta = delta_ && *delta_ == s.literal;
    std::size_t lo = is_delta ? lo_ : 0;
    std::size_t hi = is_delta ? hi_ : r->rows.size();
    std::size_t mark = b.size();
    // Rows may be appended during evaluation; copy matches out first.
    std::vector<Term> rows;
    for_each_row(*r, lit, lo, hi, [&](const Term& row) { rows.push_back(row); });
    for (const Term& row : rows) {
      if (match(lit, row, b)) {
        eval(i + 1, b, derived);
        b.truncate(mark);
      }
    }
  }

  const Rule& rule_;
  Database& db_;
  std::vector<Step> steps_;
  std::optional<std::size_t> delta_;
  std::size_t lo_ = 0, hi_ = 0;
};

BeliefSet evaluate_program(const Program& p, std::span<const Info> extra_facts) {
  auto strat = stratify(p);
  if (!strat) throw ProgramError("negation is not stratified");
  Database db;
  for (const Info& f : p.facts) db.insert(f);
  for (const Info& f : extra_facts) db.insert(f);

  std::map<int, std::vector<const Rule*>> by_stratum;
  for (const Rule& r : p.rules) by_stratum[(*strat)[key_of(r.head)]].push_back(&r);

  for (auto& [level, rules] : by_stratum) {
    std::unordered_set<PredKey, PredKeyHash> here;
    for (const Rule* r : rules) here.insert(key_of(r->head));

    std::vector<Term> derived;
    for (const Rule* r : rules) {
      RuleEvaluator ev(*r, db);
      ev.plan(std::nullopt);
      ev.run(0, 0, derived);
    }
    // Delta windows per recursive predicate.
    std::unordered_map<PredKey, std::pair<std::size_t, std::size_t>, PredKeyHash> window;
    for (const PredKey& k : here) window[k] = {db.rel(k).rows.size(), db.rel(k).rows.size()};
    auto commit = [&] {
      bool any = false;
      for (const Term& t : derived) any = db.insert(t) || any;
      derived.clear();
      for (auto& [k, w] : window) {
        w.first = w.second;
        w.second = db.rel(k).rows.size();
      }
      return any;
    };
    bool changed = commit();
    while (changed) {
      for (const Rule* r : rules) {
        for (std::size_t i = 0; i < r->pos.size(); ++i) {
          if (is_builtin(r->pos[i]) || !here.contains(key_of(r->pos[i]))) continue;
          auto [lo, hi] = window[key_of(r->pos[i])];
          if (lo == hi) continue;
          RuleEvaluator ev(*r, db);
          ev.plan(i);
          ev.run(lo, hi, derived);
        }
      }
      changed = commit();
    }
  }
  return db.to_belief_set();
}

}  // namespace

std::vector<BeliefSet> factstore_semantics(const Program& kb) { return {kb.facts}; }

BeliefSet perfect_model(const Program& kb) {
  if (kb.rules.empty()) return kb.facts;
  return evaluate_program(kb, {});
}

std::vector<BeliefSet> forward_chain(const Program& kb) { return {perfect_model(kb)}; }

std::vector<BeliefSet> enumerate_choices(const Program& kb) {
  std::vector<BeliefSet> out;
  std::set<BeliefSet> seen;
  std::vector<std::size_t> pick(kb.choices.size(), 0);
  std::vector<Info> selection(kb.choices.size(), eoc_atom());
  while (true) {
    for (std::size_t g = 0; g < kb.choices.size(); ++g) selection[g] = kb.choices[g][pick[g]];
    BeliefSet s = evaluate_program(kb, selection);
    if (seen.insert(s).second) out.push_back(std::move(s));
    // Odometer: last group varies fastest.
    std::size_t g = kb.choices.size();
    while (g > 0) {
      --g;
      if (++pick[g] < kb.choices[g].size()) break;
      pick[g] = 0;
      if (g == 0) return out;
    }
    if (kb.choices.empty()) return out;
  }
}

// --- suites -----------------------------------------------------------------------

KnowledgeBase make_kb(std::string_view formalism, Program p) {
  return KnowledgeBase(std::string(formalism), std::make_shared<const Program>(std::move(p)));
}

const Program& program_of(const KnowledgeBase& kb) {
  const Program* p = kb.as<Program>();
  if (!p) throw ProgramError("knowledge base of formalism '" + kb.formalism() + "' is not a program");
  return *p;
}

namespace {

SuitePtr make_program_suite(std::string_view tag, std::function<bool(const Program&)> ok,
                            std::vector<Semantics> sems) {
  auto suite = std::make_shared<LogicSuite>();
  suite->tag = std::string(tag);
  suite->admissible = [tag = std::string(tag), ok](const KnowledgeBase& kb) {
    const Program* p = kb.as<Program>();
    return kb.formalism() == tag && p && ok(*p);
  };
  suite->semantics = std::move(sems);
  suite->parse_kb = [tag = std::string(tag)](std::string_view text) {
    return make_kb(tag, parse_program(text));
  };
  return suite;
}

}  // namespace

SuitePtr fact_suite() {
  static const SuitePtr s = make_program_suite(
      kFactSuite, [](const Program& p) { return p.rules.empty() && p.choices.empty(); },
      {{"identity", [](const KnowledgeBase& kb) { return factstore_semantics(program_of(kb)); }}});
  return s;
}

SuitePtr rule_suite() {
  static const SuitePtr s = make_program_suite(
      kRuleSuite, [](const Program& p) { return p.choices.empty() && is_stratified(p); },
      {{"perfect", [](const KnowledgeBase& kb) { return forward_chain(program_of(kb)); }}});
  return s;
}

SuitePtr choice_suite() {
  static const SuitePtr s = make_program_suite(
      kChoiceSuite, [](const Program& p) { return is_stratified(p); },
      {{"all", [](const KnowledgeBase& kb) { return enumerate_choices(program_of(kb)); }},
       {"first", [](const KnowledgeBase& kb) {
          auto all = enumerate_choices(program_of(kb));
          all.resize(std::min<std::size_t>(all.size(), 1));
          return all;
        }}});
  return s;
}

// --- controllers ---------------------------------------------------------------------

namespace {

bool condition_holds(const Term& cond, const Bindings& b, const Program& kb,
                     std::span<const Info> incoming) {
  Term c = substitute(cond, b);
  Bindings tmp = b;
  if (c.is_ground()) {
    if (kb.facts.contains(c)) return true;
    return std::find(incoming.begin(), incoming.end(), c) != incoming.end();
  }
  for (const Info& f : kb.facts)
    if (match(c, f, tmp)) return true;
  for (const Info& f : incoming)
    if (match(c, f, tmp)) return true;
  return false;
}

const Program& empty_program() {
  static const Program p;
  return p;
}

}  // namespace

std::vector<Info> incoming_infos(std::span<const DataPackage> pkgs, const Program& kb,
                                 const std::vector<IgnoreFilter>& ignore) {
  std::vector<Info> all;
  for (const DataPackage& p : pkgs)
    for (const Info& i : p.infos)
      if (!is_eoc(i)) all.push_back(i);
  if (ignore.empty()) return all;
  std::vector<Info> kept;
  for (const Info& i : all) {
    bool drop = false;
    for (const IgnoreFilter& f : ignore) {
      Bindings b;
      if (match(f.pattern, i, b) && condition_holds(f.condition, b, kb, all)) {
        drop = true;
        break;
      }
    }
    if (!drop) kept.push_back(i);
  }
  return kept;
}

ControllerPolicy parse_controller_policy(std::string_view text) {
  text = trim(text);
  ControllerPolicy p;
  auto open = text.find('(');
  std::string_view head = trim(text.substr(0, open));
  if (open != std::string_view::npos) {
    if (text.back() != ')') throw ProgramError("malformed controller policy");
    for (std::string_view s : split_top_level(text.substr(open + 1, text.size() - open - 2), ','))
      if (!s.empty()) p.sources.insert(std::string(s));
  }
  if (head == "always") p.kind = ControllerPolicy::Kind::Always;
  else if (head == "nonempty_buffer") p.kind = ControllerPolicy::Kind::NonemptyBuffer;
  else if (head == "novel_info") p.kind = ControllerPolicy::Kind::NovelInfo;
  else if (head == "wait_for_sources") p.kind = ControllerPolicy::Kind::WaitForSources;
  else if (head == "wait_for_eoc") p.kind = ControllerPolicy::Kind::WaitForEoc;
  else throw ProgramError("unknown controller policy '" + std::string(head) + "'");
  bool needs_sources = p.kind == ControllerPolicy::Kind::WaitForSources ||
                       p.kind == ControllerPolicy::Kind::WaitForEoc;
  if (needs_sources && p.sources.empty())
    throw ProgramError("controller policy needs a nonempty source set");
  return p;
}

std::string render_controller_policy(const ControllerPolicy& p) {
  auto with_sources = [&](std::string head) {
    head += '(';
    bool first = true;
    for (const Name& s : p.sources) {
      if (!first) head += ',';
      first = false;
      head += s;
    }
    return head + ')';
  };
  switch (p.kind) {
    case ControllerPolicy::Kind::Always: return "always";
    case ControllerPolicy::Kind::NonemptyBuffer: return "nonempty_buffer";
    case ControllerPolicy::Kind::NovelInfo: return "novel_info";
    case ControllerPolicy::Kind::WaitForSources: return with_sources("wait_for_sources");
    case ControllerPolicy::Kind::WaitForEoc: return with_sources("wait_for_eoc");
  }
  return "always";
}

Controller make_controller(ControllerPolicy policy) {
  return [policy = std::move(policy)](const KnowledgeBase& kb, const InformationBuffer& ib) {
    switch (policy.kind) {
      case ControllerPolicy::Kind::Always:
        return true;
      case ControllerPolicy::Kind::NonemptyBuffer:
        return !ib.empty();
      case ControllerPolicy::Kind::WaitForSources:
      case ControllerPolicy::Kind::WaitForEoc: {
        bool eoc = policy.kind == ControllerPolicy::Kind::WaitForEoc;
        for (const Name& s : policy.sources) {
          bool seen = false;
          for (std::size_t i = 0; i < ib.size() && !seen; ++i)
            seen = ib[i].source == s && (!eoc || ib[i].contains_eoc());
          if (!seen) return false;
        }
        return true;
      }
      case ControllerPolicy::Kind::NovelInfo: {
        const Program* p = kb.as<Program>();
        const Program& prog = p ? *p : empty_program();
        auto pkgs = ib.to_vector();
        for (const Info& i : incoming_infos(pkgs, prog, policy.ignore))
          if (!prog.facts.contains(i)) return true;
        return false;
      }
    }
    return false;
  };
}

// --- updaters ------------------------------------------------------------------------

ForgetFilter parse_forget(std::string_view text) {
  text = trim(text);
  if (text.starts_with("forget")) text = trim(text.substr(6));
  if (!text.empty() && text.back() == '.') text.remove_suffix(1);
  ForgetFilter f;
  // `P on T`: split at a top-level " on "
  std::size_t depth = 0, split = std::string_view::npos;
  for (std::size_t i = 0; i + 4 <= text.size(); ++i) {
    char c = text[i];
    if (c == '(') ++depth;
    else if (c == ')') --depth;
    else if (depth == 0 && text.substr(i, 4) == " on ") {
      split = i;
      break;
    }
  }
  if (split == std::string_view::npos) {
    f.retract = parse_pattern(text);
  } else {
    f.retract = parse_pattern(trim(text.substr(0, split)));
    f.trigger = parse_pattern(trim(text.substr(split + 4)));
  }
  return f;
}

IgnoreFilter parse_ignore(std::string_view text) {
  text = trim(text);
  if (text.starts_with("ignore")) text = trim(text.substr(6));
  if (!text.empty() && text.back() == '.') text.remove_suffix(1);
  std::size_t depth = 0;
  for (std::size_t i = 0; i + 4 <= text.size(); ++i) {
    char c = text[i];
    if (c == '(') ++depth;
    else if (c == ')') --depth;
    else if (depth == 0 && text.substr(i, 4) == " if ")
      return {parse_pattern(trim(text.substr(0, i))), parse_pattern(trim(text.substr(i + 4)))};
  }
  throw ProgramError("ignore filter needs 'pattern if condition'");
}

std::string render_forget(const ForgetFilter& f) {
  std::string out = "forget " + render_term(f.retract);
  if (f.trigger) out += " on " + render_term(*f.trigger);
  return out + ".";
}

std::string render_ignore(const IgnoreFilter& f) {
  return "ignore " + render_term(f.pattern) + " if " + render_term(f.condition) + ".";
}

ContextConfiguration updater_append_facts(const InformationBuffer& ib, const KnowledgeBase& kb,
                                          const ContextConfiguration& current,
                                          const UpdatePolicy& policy) {
  const Program& old = program_of(kb);
  std::size_t take = ib.size();
  if (policy.max_packages) take = std::min(take, *policy.max_packages);
  std::vector<DataPackage> consumed;
  for (std::size_t i = 0; i < take; ++i) consumed.push_back(ib[i]);
  std::vector<Info> incoming = incoming_infos(consumed, old, policy.ignore);

  Program next = old;
  for (const ForgetFilter& f : policy.forget) {
    auto erase_matching = [&](const Term& pattern) {
      for (auto it = next.facts.begin(); it != next.facts.end();) {
        Bindings b;
        if (match(pattern, *it, b)) it = next.facts.erase(it);
        else ++it;
      }
    };
    if (!f.trigger) {
      erase_matching(f.retract);
      continue;
    }
    for (const Info& i : incoming) {
      Bindings b;
      if (match(*f.trigger, i, b)) erase_matching(substitute(f.retract, b));
    }
  }
  next.facts.insert(incoming.begin(), incoming.end());

  ContextConfiguration out = current;
  out.kb = next == old ? kb : make_kb(kb.formalism(), std::move(next));
  out.buffer = ib.drop_front(take);
  return out;
}

Updater make_append_updater(UpdatePolicy policy) {
  return [policy = std::move(policy)](const InformationBuffer& ib, const KnowledgeBase& kb,
                                      const ContextConfiguration& current) {
    return updater_append_facts(ib, kb, current, policy);
  };
}

}  // namespace amcs
