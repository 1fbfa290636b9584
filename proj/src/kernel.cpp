#include "amcs/kernel.hpp"

#include <algorithm>
#include <stdexcept>

namespace amcs {

std::string render_belief_set(const BeliefSet& s) {
  std::string out = "{";
  bool first = true;
  for (const Belief& b : s) {
    if (!first) out += ',';
    first = false;
    render_term(b, out);
  }
  out += '}';
  return out;
}

// --- data packages --------------------------------------------------------

DataPackage::DataPackage(Name src, std::vector<Info> items)
    : source(std::move(src)), infos(std::move(items)) {
  std::sort(infos.begin(), infos.end());
  infos.erase(std::unique(infos.begin(), infos.end()), infos.end());
}

DataPackage::DataPackage(Name src, const BeliefSet& items)
    : source(std::move(src)), infos(items.begin(), items.end()) {}

bool DataPackage::contains(const Info& i) const {
  return std::binary_search(infos.begin(), infos.end(), i);
}

std::string render_package(const DataPackage& p) {
  std::string out = p.source;
  out += '[';
  out += render_term_list(p.infos);
  out += ']';
  return out;
}

DataPackage parse_package(std::string_view text) {
  text = trim(text);
  auto open = text.find('[');
  if (open == std::string_view::npos || text.empty() || text.back() != ']')
    throw SyntaxError("malformed data package '" + std::string(text) + "'", 1);
  std::string_view src = trim(text.substr(0, open));
  if (!is_valid_name(src)) throw SyntaxError("invalid package source '" + std::string(src) + "'", 1);
  auto inner = text.substr(open + 1, text.size() - open - 2);
  return DataPackage(std::string(src), parse_term_list(inner, false));
}

// --- buffers ----------------------------------------------------------------

InformationBuffer::InformationBuffer(std::initializer_list<DataPackage> pkgs)
    : InformationBuffer(std::vector<DataPackage>(pkgs)) {}

InformationBuffer::InformationBuffer(std::vector<DataPackage> pkgs)
    : store_(std::make_shared<std::vector<DataPackage>>(std::move(pkgs))),
      begin_(0),
      end_(store_->size()) {}

void InformationBuffer::append(DataPackage p) {
  if (!store_) {
    store_ = std::make_shared<std::vector<DataPackage>>();
    begin_ = end_ = 0;
  }
  if (end_ != store_->size()) {
    // Someone else extended the shared storage past our end; detach.
    auto fresh = std::make_shared<std::vector<DataPackage>>(store_->begin() + begin_,
                                                            store_->begin() + end_);
    store_ = std::move(fresh);
    end_ -= begin_;
    begin_ = 0;
  }
  store_->push_back(std::move(p));
  ++end_;
}

InformationBuffer InformationBuffer::drop_front(std::size_t k) const {
  InformationBuffer out = *this;
  out.begin_ = std::min(end_, begin_ + k);
  return out;
}

bool InformationBuffer::is_prefix_of(const InformationBuffer& other) const {
  if (size() > other.size()) return false;
  if (store_ == other.store_ && begin_ == other.begin_) return true;
  for (std::size_t i = 0; i < size(); ++i)
    if (!((*this)[i] == other[i])) return false;
  return true;
}

bool InformationBuffer::is_suffix_of(const InformationBuffer& other) const {
  if (size() > other.size()) return false;
  if (store_ == other.store_ && end_ == other.end_ && begin_ >= other.begin_) return true;
  std::size_t off = other.size() - size();
  for (std::size_t i = 0; i < size(); ++i)
    if (!((*this)[i] == other[off + i])) return false;
  return true;
}

std::vector<DataPackage> InformationBuffer::to_vector() const {
  if (!store_) return {};
  return {store_->begin() + begin_, store_->begin() + end_};
}

bool operator==(const InformationBuffer& a, const InformationBuffer& b) {
  if (a.size() != b.size()) return false;
  if (a.same_window(b)) return true;
  return a.is_prefix_of(b);
}

// --- output rules -------------------------------------------------------------

bool OutputRule::is_ground() const {
  auto g = [](const Term& t) { return t.is_ground(); };
  return head.is_ground() && std::all_of(pos.begin(), pos.end(), g) &&
         std::all_of(neg.begin(), neg.end(), g);
}

OutputRule parse_output_rule(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.back() == '.') text.remove_suffix(1);
  auto colon = text.find(':');
  if (colon == std::string_view::npos || (colon + 1 < text.size() && text[colon + 1] == '-'))
    throw SyntaxError("output rule needs 'stakeholder:' prefix", 1);
  OutputRule r;
  std::string_view who = trim(text.substr(0, colon));
  if (!is_valid_name(who)) throw SyntaxError("invalid stakeholder '" + std::string(who) + "'", 1);
  r.stakeholder = std::string(who);
  std::string_view rest = text.substr(colon + 1);
  std::string_view head = rest, body;
  if (auto arrow = rest.find(":-"); arrow != std::string_view::npos) {
    head = rest.substr(0, arrow);
    body = rest.substr(arrow + 2);
  }
  r.head = parse_pattern(trim(head));
  if (is_eoc(r.head)) throw SyntaxError("output rule head must not be eoc", 1);
  if (!trim(body).empty()) {
    for (std::string_view lit : split_top_level(body, ',')) {
      if (lit.starts_with("not ") || lit.starts_with("not\t"))
        r.neg.push_back(parse_pattern(trim(lit.substr(4))));
      else
        r.pos.push_back(parse_pattern(lit));
    }
  }
  std::vector<std::string> head_vars, pos_vars;
  collect_variables(r.head, head_vars);
  for (const Term& p : r.pos) collect_variables(p, pos_vars);
  for (const auto& v : head_vars)
    if (std::find(pos_vars.begin(), pos_vars.end(), v) == pos_vars.end())
      throw SyntaxError("unsafe variable " + v + " in output rule head", 1);
  return r;
}

std::string render_output_rule(const OutputRule& r) {
  std::string out = r.stakeholder + ": " + render_term(r.head);
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

RuleSet make_rule_set(std::vector<OutputRule> rules) {
  return std::make_shared<const std::vector<OutputRule>>(std::move(rules));
}

bool body_holds(const OutputRule& r, const BeliefSet& s) {
  for (const Term& p : r.pos)
    if (!s.contains(p)) return false;
  for (const Term& n : r.neg)
    if (s.contains(n)) return false;
  return true;
}

namespace {

template <class F>
void for_each_candidate(const BeliefSet& s, const Term& pattern, F&& f) {
  if (pattern.is_variable()) {
    for (const Belief& b : s) f(b);
    return;
  }
  for (auto it = s.lower_bound(Term::symbol(pattern.name()));
       it != s.end() && !it->is_variable() && it->name() == pattern.name(); ++it)
    f(*it);
}

bool exists_match(const BeliefSet& s, const Term& pattern, Bindings& b) {
  Term p = substitute(pattern, b);
  if (p.is_ground()) return s.contains(p);
  bool found = false;
  std::size_t mark = b.size();
  for_each_candidate(s, p, [&](const Belief& x) {
    if (!found && match(p, x, b)) {
      found = true;
      b.truncate(mark);
    }
  });
  return found;
}

void ground_rule(const OutputRule& r, std::size_t idx, const BeliefSet& s, Bindings& b,
                 std::vector<OutputRule>& out) {
  if (idx == r.pos.size()) {
    for (const Term& n : r.neg)
      if (exists_match(s, n, b)) return;
    OutputRule inst;
    inst.stakeholder = r.stakeholder;
    inst.head = substitute(r.head, b);
    for (const Term& p : r.pos) inst.pos.push_back(substitute(p, b));
    for (const Term& n : r.neg) inst.neg.push_back(substitute(n, b));
    out.push_back(std::move(inst));
    return;
  }
  Term p = substitute(r.pos[idx], b);
  if (p.is_ground()) {
    if (s.contains(p)) ground_rule(r, idx + 1, s, b, out);
    return;
  }
  std::size_t mark = b.size();
  for_each_candidate(s, p, [&](const Belief& x) {
    if (match(p, x, b)) {
      ground_rule(r, idx + 1, s, b, out);
      b.truncate(mark);
    }
  });
}

}  // namespace

std::vector<OutputRule> active_instances(std::span<const OutputRule> rules, const BeliefSet& s) {
  std::vector<OutputRule> out;
  for (const OutputRule& r : rules) {
    if (r.is_ground()) {
      if (body_holds(r, s)) out.push_back(r);
      continue;
    }
    Bindings b;
    ground_rule(r, 0, s, b, out);
  }
  return out;
}

DataPackage relout(const Name& source, const BeliefSet& s, std::span<const OutputRule> rules,
                   const Name& stakeholder) {
  std::vector<Info> infos;
  for (const OutputRule& inst : active_instances(rules, s))
    if (inst.stakeholder == stakeholder) infos.push_back(inst.head);
  return DataPackage(source, std::move(infos));
}

std::set<Name> stakeholders(std::span<const OutputRule> rules) {
  std::set<Name> out;
  for (const OutputRule& r : rules) out.insert(r.stakeholder);
  return out;
}

// --- knowledge bases --------------------------------------------------------

bool operator==(const KnowledgeBase& a, const KnowledgeBase& b) {
  if (a.formalism_ != b.formalism_) return false;
  if (a.payload_ == b.payload_) return true;
  if (!a.payload_ || !b.payload_) return false;
  return a.payload_->equals(*b.payload_);
}

const Semantics* LogicSuite::find(std::string_view id) const {
  for (const Semantics& s : semantics)
    if (s.id == id) return &s;
  return nullptr;
}

int AMCSSpec::context_index(std::string_view name) const {
  for (std::size_t i = 0; i < contexts.size(); ++i)
    if (contexts[i].name == name) return static_cast<int>(i);
  return -1;
}

int AMCSSpec::stream_index(std::string_view name) const {
  for (std::size_t i = 0; i < output_streams.size(); ++i)
    if (output_streams[i] == name) return static_cast<int>(i);
  return -1;
}

bool AMCSSpec::is_sensor(std::string_view name) const {
  return std::find(sensors.begin(), sensors.end(), name) != sensors.end();
}

// --- validation ---------------------------------------------------------------

std::string_view condition_tag(Condition c) {
  switch (c) {
    case Condition::I: return "i";
    case Condition::II: return "ii";
    case Condition::III: return "iii";
    case Condition::IV: return "iv";
    case Condition::V: return "v";
    case Condition::Suffix: return "suffix";
    case Condition::Def5: return "def5";
  }
  return "?";
}

std::string render_violation(const Violation& v) {
  return "violation(" + std::string(condition_tag(v.condition)) + ") t=" + std::to_string(v.time) +
         " at=" + v.where + ": " + v.message;
}

std::vector<Violation> validate_system(const AMCSSpec& spec, const SystemConfiguration& init) {
  std::vector<Violation> out;
  auto add = [&](const Name& where, std::string msg) {
    out.push_back({Condition::Def5, 0, where, std::move(msg)});
  };

  if (spec.contexts.empty()) add("", "system has no contexts");
  std::vector<Name> all;
  for (const Context& c : spec.contexts) all.push_back(c.name);
  for (const Name& n : spec.output_streams) all.push_back(n);
  for (const Name& n : spec.sensors) all.push_back(n);
  std::set<Name> seen;
  for (const Name& n : all) {
    if (!is_valid_name(n)) add(n, "invalid name '" + n + "'");
    if (!seen.insert(n).second) add(n, "duplicate name '" + n + "'");
  }

  if (init.contexts.size() != spec.contexts.size() ||
      init.streams.size() != spec.output_streams.size()) {
    add("", "configuration shape does not match the system");
    return out;
  }

  for (std::size_t i = 0; i < spec.contexts.size(); ++i) {
    const Context& ctx = spec.contexts[i];
    const ContextConfiguration& cfg = init.contexts[i];
    for (const OutputRule& r : cfg.rules()) {
      if (!spec.in_names(r.stakeholder))
        add(ctx.name, "output rule '" + render_output_rule(r) + "' names unknown stakeholder '" +
                          r.stakeholder + "'");
      if (is_eoc(r.head))
        add(ctx.name, "output rule '" + render_output_rule(r) + "' produces eoc");
    }
    if (!ctx.suite) {
      add(ctx.name, "context has no logic suite");
      continue;
    }
    if (!ctx.suite->find(cfg.semantics))
      add(ctx.name, "semantics '" + cfg.semantics + "' not in suite '" + ctx.suite->tag + "'");
    if (cfg.kb.formalism() != ctx.suite->tag || !ctx.suite->admissible(cfg.kb))
      add(ctx.name, "knowledge base not admissible for suite '" + ctx.suite->tag + "'");
    if (!cfg.management.controller || !cfg.management.updater)
      add(ctx.name, "context management incomplete");
  }
  for (std::size_t j = 0; j < spec.output_streams.size(); ++j) {
    const InformationBuffer& ob = init.streams[j];
    for (std::size_t h = 0; h < ob.size(); ++h)
      if (spec.context_index(ob[h].source) < 0)
        add(spec.output_streams[j], "output stream package from non-context '" + ob[h].source + "'");
  }
  return out;
}

}  // namespace amcs
