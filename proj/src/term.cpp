#include "amcs/term.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

namespace amcs {

namespace {

std::size_t mix(std::size_t seed, std::size_t v) {
  return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

class Parser {
 public:
  Parser(std::string_view text, bool allow_vars) : s_(text), vars_(allow_vars) {}

  Term parse_single() {
    skip_ws();
    if (at_end()) fail("empty term");
    Term t = parse();
    skip_ws();
    if (!at_end()) fail("unexpected character '" + std::string(1, s_[pos_]) + "'");
    return t;
  }

  std::vector<Term> parse_list() {
    std::vector<Term> out;
    skip_ws();
    if (at_end()) return out;
    while (true) {
      out.push_back(parse());
      skip_ws();
      if (at_end()) break;
      expect(',');
    }
    return out;
  }

 private:
  Term parse() {
    skip_ws();
    if (at_end()) fail("unexpected end of input");
    char c = s_[pos_];
    if (std::isupper(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (!at_end() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
        ++pos_;
      std::string name(s_.substr(start, pos_ - start));
      if (!vars_) {
        pos_ = start;
        fail("variable '" + name + "' in ground term");
      }
      return Term::variable(std::move(name));
    }
    if (!is_name_char(c)) fail("unexpected character '" + std::string(1, c) + "'");
    std::size_t start = pos_;
    while (!at_end() && is_name_char(s_[pos_])) ++pos_;
    std::string name(s_.substr(start, pos_ - start));
    skip_ws();
    if (at_end() || s_[pos_] != '(') return Term::symbol(std::move(name));
    ++pos_;
    std::vector<Term> args;
    while (true) {
      args.push_back(parse());
      skip_ws();
      if (at_end()) fail("unexpected end of input");
      if (s_[pos_] == ')') {
        ++pos_;
        break;
      }
      expect(',');
    }
    return Term::compound(std::move(name), std::move(args));
  }

  void expect(char c) {
    skip_ws();
    if (at_end()) fail(std::string("expected '") + c + "'");
    if (s_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }
  void skip_ws() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool at_end() const { return pos_ >= s_.size(); }
  [[noreturn]] void fail(const std::string& msg) const {
    throw SyntaxError("syntax error at column " + std::to_string(pos_ + 1) + ": " + msg,
                      pos_ + 1);
  }

  std::string_view s_;
  bool vars_;
  std::size_t pos_ = 0;
};

}  // namespace

Term::Term() {
  static const std::shared_ptr<const Node> empty = symbol("").node_;
  node_ = empty;
}

Term Term::symbol(std::string name) {
  std::size_t h = mix(std::hash<std::string>{}(name), 1);
  return Term(std::make_shared<const Node>(Node{Kind::Symbol, std::move(name), {}, true, h}));
}

Term Term::variable(std::string name) {
  std::size_t h = mix(std::hash<std::string>{}(name), 3);
  return Term(std::make_shared<const Node>(Node{Kind::Variable, std::move(name), {}, false, h}));
}

Term Term::compound(std::string functor, std::vector<Term> args) {
  if (args.empty()) return symbol(std::move(functor));
  std::size_t h = mix(std::hash<std::string>{}(functor), 2 + args.size());
  bool ground = true;
  for (const Term& a : args) {
    h = mix(h, a.hash());
    ground = ground && a.is_ground();
  }
  return Term(std::make_shared<const Node>(
      Node{Kind::Compound, std::move(functor), std::move(args), ground, h}));
}

bool Term::is_integer() const {
  if (!is_symbol() || name().empty() || name().size() > 18) return false;
  return std::all_of(name().begin(), name().end(),
                     [](char c) { return c >= '0' && c <= '9'; });
}

long long Term::as_integer() const {
  long long v = 0;
  std::from_chars(name().data(), name().data() + name().size(), v);
  return v;
}

bool operator==(const Term& a, const Term& b) {
  if (a.node_ == b.node_) return true;
  if (a.node_->hash != b.node_->hash || a.node_->kind != b.node_->kind) return false;
  return a.node_->name == b.node_->name && a.node_->args == b.node_->args;
}

std::strong_ordering operator<=>(const Term& a, const Term& b) {
  if (a.node_ == b.node_) return std::strong_ordering::equal;
  auto rank = [](Term::Kind k) { return k == Term::Kind::Variable ? 1 : 0; };
  if (auto c = rank(a.kind()) <=> rank(b.kind()); c != 0) return c;
  if (auto c = a.node_->name.compare(b.node_->name); c != 0)
    return c < 0 ? std::strong_ordering::less : std::strong_ordering::greater;
  if (auto c = a.arity() <=> b.arity(); c != 0) return c;
  for (std::size_t i = 0; i < a.arity(); ++i)
    if (auto c = a.arg(i) <=> b.arg(i); c != 0) return c;
  return std::strong_ordering::equal;
}

const Term& eoc_atom() {
  static const Term t = Term::symbol("eoc");
  return t;
}

bool is_eoc(const Term& t) { return t == eoc_atom(); }

bool is_name_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
}

bool is_valid_name(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), is_name_char);
}

Info parse_term(std::string_view text) { return Parser(text, false).parse_single(); }

Term parse_pattern(std::string_view text) { return Parser(text, true).parse_single(); }

std::vector<Term> parse_term_list(std::string_view text, bool allow_variables) {
  return Parser(text, allow_variables).parse_list();
}

void render_term(const Term& t, std::string& out) {
  out += t.name();
  if (!t.is_compound()) return;
  out += '(';
  for (std::size_t i = 0; i < t.arity(); ++i) {
    if (i) out += ',';
    render_term(t.arg(i), out);
  }
  out += ')';
}

std::string render_term(const Term& t) {
  std::string out;
  render_term(t, out);
  return out;
}

std::string render_term_list(std::span<const Term> terms) {
  std::string out;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (i) out += ',';
    render_term(terms[i], out);
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_top_level(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (c == '(' || c == '[' || c == '{') ++depth;
    else if (c == ')' || c == ']' || c == '}') --depth;
    else if (c == sep && depth == 0) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  out.push_back(trim(s.substr(start)));
  return out;
}

const Term* Bindings::find(const std::string& var) const {
  for (const auto& [name, value] : entries_)
    if (name == var) return &value;
  return nullptr;
}

namespace {

bool match_rec(const Term& p, const Term& g, Bindings& b) {
  switch (p.kind()) {
    case Term::Kind::Variable: {
      if (p.is_anonymous()) return true;
      if (const Term* bound = b.find(p.name())) return *bound == g;
      b.bind(p.name(), g);
      return true;
    }
    case Term::Kind::Symbol:
      return g.is_symbol() && p.name() == g.name();
    case Term::Kind::Compound:
      if (!g.is_compound() || g.arity() != p.arity() || g.name() != p.name()) return false;
      if (p.is_ground()) return p == g;
      for (std::size_t i = 0; i < p.arity(); ++i)
        if (!match_rec(p.arg(i), g.arg(i), b)) return false;
      return true;
  }
  return false;
}

}  // namespace

bool match(const Term& pattern, const Term& ground, Bindings& b) {
  std::size_t mark = b.size();
  if (match_rec(pattern, ground, b)) return true;
  b.truncate(mark);
  return false;
}

Term substitute(const Term& pattern, const Bindings& b) {
  if (pattern.is_ground()) return pattern;
  if (pattern.is_variable()) {
    if (pattern.is_anonymous()) return pattern;
    const Term* v = b.find(pattern.name());
    return v ? *v : pattern;
  }
  std::vector<Term> args;
  args.reserve(pattern.arity());
  for (const Term& a : pattern.args()) args.push_back(substitute(a, b));
  return Term::compound(pattern.name(), std::move(args));
}

void collect_variables(const Term& t, std::vector<std::string>& out) {
  if (t.is_variable()) {
    if (!t.is_anonymous() && std::find(out.begin(), out.end(), t.name()) == out.end())
      out.push_back(t.name());
    return;
  }
  for (const Term& a : t.args()) collect_variables(a, out);
}

}  // namespace amcs
