#pragma once

// Reference implementations used as test oracles. They share no evaluation
// code with the library: programs are grounded over their constants and
// stable models are found by enumerating guesses, output rules are matched
// by brute force over the belief set.

#include <algorithm>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "amcs/formalisms.hpp"
#include "amcs/kernel.hpp"

namespace oracle {

using amcs::Program;
using amcs::Rule;
using amcs::Term;
using Subst = std::map<std::string, Term>;
using Model = std::set<Term>;

inline Term substitute(const Term& t, const Subst& s) {
  if (t.is_variable()) {
    auto it = s.find(t.name());
    return it == s.end() ? t : it->second;
  }
  if (!t.is_compound()) return t;
  std::vector<Term> args;
  for (const Term& a : t.args()) args.push_back(substitute(a, s));
  return Term::compound(t.name(), std::move(args));
}

/// One-way matching of a pattern against a ground term. `_` matches anything
/// without binding.
inline bool unify(const Term& pat, const Term& g, Subst& s) {
  if (pat.is_variable()) {
    if (pat.is_anonymous()) return true;
    auto [it, fresh] = s.emplace(pat.name(), g);
    return fresh || it->second == g;
  }
  if (pat.is_symbol()) return g.is_symbol() && pat.name() == g.name();
  if (!g.is_compound() || g.name() != pat.name() || g.arity() != pat.arity()) return false;
  for (std::size_t i = 0; i < pat.arity(); ++i)
    if (!unify(pat.arg(i), g.arg(i), s)) return false;
  return true;
}

inline void variables(const Term& t, std::set<std::string>& out) {
  if (t.is_variable() && !t.is_anonymous()) out.insert(t.name());
  for (const Term& a : t.args()) variables(a, out);
}

/// Constants occurring as arguments (at any depth) of `t`.
inline void constants(const Term& t, std::set<Term>& out) {
  for (const Term& a : t.args()) {
    if (a.is_symbol() || a.is_integer()) out.insert(a);
    constants(a, out);
  }
}

inline bool is_builtin(const Term& t) {
  return t.arity() == 2 && (t.name() == "lt" || t.name() == "le" || t.name() == "neq");
}

inline bool compare_builtin(const Term& t) {
  const Term& a = t.arg(0);
  const Term& b = t.arg(1);
  int c;
  if (a.is_integer() && b.is_integer())
    c = a.as_integer() < b.as_integer() ? -1 : a.as_integer() > b.as_integer() ? 1 : 0;
  else
    c = a < b ? -1 : b < a ? 1 : 0;
  if (t.name() == "lt") return c < 0;
  if (t.name() == "le") return c <= 0;
  return c != 0;
}

struct GroundRule {
  Term head;
  std::vector<Term> pos;
  std::vector<Term> neg;
};

/// All ground instances over the constants of the program (facts, rule
/// arguments), builtins evaluated away. Choices are ignored.
inline std::vector<GroundRule> ground(const Program& p) {
  std::set<Term> dom;
  for (const Term& f : p.facts) constants(f, dom);
  for (const Rule& r : p.rules) {
    constants(r.head, dom);
    for (const Term& l : r.pos) constants(l, dom);
    for (const Term& l : r.neg) constants(l, dom);
  }
  std::vector<Term> domain(dom.begin(), dom.end());
  std::vector<GroundRule> out;
  for (const Term& f : p.facts) out.push_back({f, {}, {}});
  for (const Rule& r : p.rules) {
    std::set<std::string> vs;
    variables(r.head, vs);
    for (const Term& l : r.pos) variables(l, vs);
    for (const Term& l : r.neg) variables(l, vs);
    std::vector<std::string> vars(vs.begin(), vs.end());
    std::vector<std::size_t> idx(vars.size(), 0);
    if (!vars.empty() && domain.empty()) continue;
    while (true) {
      Subst s;
      for (std::size_t k = 0; k < vars.size(); ++k) s.emplace(vars[k], domain[idx[k]]);
      GroundRule g{substitute(r.head, s), {}, {}};
      bool ok = true;
      for (const Term& l : r.pos) {
        Term gl = substitute(l, s);
        if (oracle::is_builtin(l)) ok = ok && compare_builtin(gl);
        else g.pos.push_back(gl);
      }
      for (const Term& l : r.neg) g.neg.push_back(substitute(l, s));
      if (ok) out.push_back(std::move(g));
      std::size_t k = vars.size();
      while (k > 0 && ++idx[k - 1] == domain.size()) idx[--k] = 0;
      if (k == 0) break;
    }
  }
  return out;
}

inline Model least_model(const std::vector<const GroundRule*>& rules) {
  Model m;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const GroundRule* r : rules) {
      if (m.contains(r->head)) continue;
      if (std::all_of(r->pos.begin(), r->pos.end(), [&](const Term& a) { return m.contains(a); })) {
        m.insert(r->head);
        changed = true;
      }
    }
  }
  return m;
}

/// Gelfond-Lifschitz stable models by enumerating the negated atoms.
inline std::vector<Model> stable_models(const Program& p) {
  std::vector<GroundRule> g = ground(p);
  std::set<Term> neg_atoms;
  for (const GroundRule& r : g) neg_atoms.insert(r.neg.begin(), r.neg.end());
  std::vector<Term> na(neg_atoms.begin(), neg_atoms.end());
  std::vector<Model> out;
  for (std::size_t mask = 0; mask < (std::size_t{1} << na.size()); ++mask) {
    std::set<Term> guess;
    for (std::size_t k = 0; k < na.size(); ++k)
      if (mask >> k & 1) guess.insert(na[k]);
    std::vector<const GroundRule*> reduct;
    for (const GroundRule& r : g)
      if (std::none_of(r.neg.begin(), r.neg.end(), [&](const Term& a) { return guess.contains(a); }))
        reduct.push_back(&r);
    Model m = least_model(reduct);
    std::set<Term> back;
    for (const Term& a : na)
      if (m.contains(a)) back.insert(a);
    if (back == guess) out.push_back(std::move(m));
  }
  return out;
}

/// Belief sets of a choice program: one per combination of alternatives
/// (last group varying fastest), duplicates dropped.
inline std::vector<Model> choice_models(const Program& p) {
  std::vector<Model> out;
  std::vector<std::size_t> idx(p.choices.size(), 0);
  for (const auto& g : p.choices)
    if (g.empty()) return out;
  while (true) {
    Program q = p;
    q.choices.clear();
    for (std::size_t k = 0; k < idx.size(); ++k) q.facts.insert(p.choices[k][idx[k]]);
    for (Model& m : stable_models(q))
      if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(std::move(m));
    std::size_t k = idx.size();
    while (k > 0 && ++idx[k - 1] == p.choices[k - 1].size()) idx[--k] = 0;
    if (k == 0) break;
  }
  return out;
}

/// Output package content for `stakeholder`: heads of every instance whose
/// positive literals are in `s` and whose negative literals match nothing.
inline std::set<Term> relout(const std::vector<amcs::OutputRule>& rules, const Model& s,
                             const std::string& stakeholder) {
  std::set<Term> out;
  std::vector<Term> beliefs(s.begin(), s.end());
  for (const amcs::OutputRule& r : rules) {
    if (r.stakeholder != stakeholder) continue;
    std::vector<std::size_t> idx(r.pos.size(), 0);
    if (!r.pos.empty() && beliefs.empty()) continue;
    while (true) {
      Subst sub;
      bool ok = true;
      for (std::size_t k = 0; k < r.pos.size() && ok; ++k) ok = unify(r.pos[k], beliefs[idx[k]], sub);
      for (const Term& n : r.neg) {
        if (!ok) break;
        Term pat = substitute(n, sub);
        for (const Term& b : beliefs) {
          Subst tmp;
          if (unify(pat, b, tmp)) ok = false;
        }
      }
      if (ok) out.insert(substitute(r.head, sub));
      std::size_t k = idx.size();
      while (k > 0 && ++idx[k - 1] == beliefs.size()) idx[--k] = 0;
      if (k == 0) break;
    }
  }
  return out;
}

// --- generators -------------------------------------------------------------------

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : eng_(seed) {}
  int range(int lo, int hi) { return lo + static_cast<int>(eng_() % static_cast<std::uint64_t>(hi - lo + 1)); }
  bool coin(int percent = 50) { return range(0, 99) < percent; }
  template <class T>
  const T& pick(const std::vector<T>& v) { return v[static_cast<std::size_t>(range(0, static_cast<int>(v.size()) - 1))]; }
  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

/// Stratified by construction: a rule for level-i predicates uses level j <= i
/// positively and level j < i negatively. Unary predicates p0..p3 over a, b,
/// c and propositions s0..s3 keep the ground universe at 16 atoms.
inline Program random_stratified_program(Gen& g, bool with_choices = false) {
  static const std::vector<Term> consts{Term::symbol("a"), Term::symbol("b"), Term::symbol("c")};
  const Term X = Term::variable("X"), Y = Term::variable("Y");
  auto unary = [](int level, const Term& arg) { return Term::compound("p" + std::to_string(level), {arg}); };
  auto prop = [](int level) { return Term::symbol("s" + std::to_string(level)); };
  auto ground_atom = [&](int level) { return g.coin(70) ? unary(level, g.pick(consts)) : prop(level); };

  Program p;
  int facts = g.range(0, 5);
  for (int i = 0; i < facts; ++i) p.facts.insert(ground_atom(g.range(0, 3)));
  int rules = g.range(1, 7);
  for (int i = 0; i < rules; ++i) {
    int lh = g.range(1, 3);
    bool has_x = g.coin(60);
    bool has_y = false;
    Rule r{has_x ? unary(lh, X) : prop(lh), {}, {}};
    if (has_x) r.pos.push_back(unary(g.range(0, lh), X));
    if (g.coin(40)) {
      r.pos.push_back(unary(g.range(0, lh), Y));
      has_y = true;
      if (has_x && g.coin(50)) r.pos.push_back(Term::compound("neq", {X, Y}));
    }
    if (g.coin(40)) r.pos.push_back(ground_atom(g.range(0, lh)));
    int negs = g.range(0, 2);
    for (int k = 0; k < negs; ++k) {
      int j = g.range(0, lh - 1);
      int kind = g.range(0, 2);
      if (kind == 0 && has_x) r.neg.push_back(unary(j, X));
      else if (kind == 1 && has_y) r.neg.push_back(unary(j, Y));
      else r.neg.push_back(ground_atom(j));
    }
    p.rules.push_back(std::move(r));
  }
  if (with_choices) {
    int groups = g.range(1, 3);
    for (int k = 0; k < groups; ++k) {
      std::vector<Term> alts;
      int n = g.range(1, 3);
      for (int j = 0; j < n; ++j) alts.push_back(ground_atom(g.range(0, 3)));
      p.choices.push_back(std::move(alts));
    }
  }
  return p;
}

}  // namespace oracle
