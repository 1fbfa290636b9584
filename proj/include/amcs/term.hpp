#pragma once

// Ground and non-ground first-order terms used for pieces of information,
// beliefs and rule patterns. Canonical text form: lowercase symbols,
// parenthesised comma-separated arguments, no whitespace.

#include <compare>
#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace amcs {

class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(std::string what, std::size_t column)
      : std::runtime_error(std::move(what)), column_(column) {}
  /// 1-based column of the offending character (one past the end for
  /// unexpected end of input).
  std::size_t column() const { return column_; }

 private:
  std::size_t column_;
};

class Term {
 public:
  enum class Kind : unsigned char { Symbol, Compound, Variable };

  /// The empty symbol; placeholder for default-constructed aggregates.
  Term();
  static Term symbol(std::string name);
  static Term variable(std::string name);
  static Term compound(std::string functor, std::vector<Term> args);

  Kind kind() const { return node_->kind; }
  bool is_symbol() const { return kind() == Kind::Symbol; }
  bool is_variable() const { return kind() == Kind::Variable; }
  bool is_compound() const { return kind() == Kind::Compound; }
  /// Anonymous variable `_`.
  bool is_anonymous() const { return is_variable() && node_->name == "_"; }

  /// Symbol text, functor name, or variable name.
  const std::string& name() const { return node_->name; }
  std::span<const Term> args() const { return node_->args; }
  std::size_t arity() const { return node_->args.size(); }
  const Term& arg(std::size_t i) const { return node_->args[i]; }

  bool is_ground() const { return node_->ground; }
  std::size_t hash() const { return node_->hash; }

  /// Integer value when the term is a symbol consisting only of digits.
  bool is_integer() const;
  long long as_integer() const;

  friend bool operator==(const Term& a, const Term& b);
  friend std::strong_ordering operator<=>(const Term& a, const Term& b);

 private:
  struct Node {
    Kind kind;
    std::string name;
    std::vector<Term> args;
    bool ground;
    std::size_t hash;
  };
  explicit Term(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

struct TermHash {
  std::size_t operator()(const Term& t) const { return t.hash(); }
};

/// A ground term.
using Info = Term;
using Belief = Term;

/// The reserved end-of-computation atom.
const Term& eoc_atom();
bool is_eoc(const Term& t);

bool is_name_char(char c);
bool is_valid_name(std::string_view s);

/// Parses a ground term. Throws SyntaxError on malformed input or variables.
Info parse_term(std::string_view text);
/// Parses a term that may contain variables (uppercase-initial or `_`).
Term parse_pattern(std::string_view text);
/// Parses a comma-separated list of terms; empty input yields an empty list.
std::vector<Term> parse_term_list(std::string_view text, bool allow_variables);

std::string render_term(const Term& t);
void render_term(const Term& t, std::string& out);
std::string render_term_list(std::span<const Term> terms);

/// Strips ASCII whitespace from both ends.
std::string_view trim(std::string_view s);
/// Splits on `sep` outside parentheses, brackets and braces; parts are trimmed.
std::vector<std::string_view> split_top_level(std::string_view s, char sep);

// --- pattern matching ------------------------------------------------------

/// Variable bindings, kept as a small flat list. Anonymous variables never
/// bind.
class Bindings {
 public:
  const Term* find(const std::string& var) const;
  void bind(const std::string& var, Term value) {
    entries_.emplace_back(var, std::move(value));
  }
  std::size_t size() const { return entries_.size(); }
  void truncate(std::size_t n) { entries_.erase(entries_.begin() + static_cast<std::ptrdiff_t>(n), entries_.end()); }

 private:
  std::vector<std::pair<std::string, Term>> entries_;
};

/// Extends `b` so that pattern under `b` equals `ground`. On failure the
/// bindings are restored to their size on entry.
bool match(const Term& pattern, const Term& ground, Bindings& b);

/// Replaces bound variables. Unbound variables are left in place.
Term substitute(const Term& pattern, const Bindings& b);

/// Collects named (non-anonymous) variables of a pattern.
void collect_variables(const Term& t, std::vector<std::string>& out);

}  // namespace amcs

template <>
struct std::hash<amcs::Term> {
  std::size_t operator()(const amcs::Term& t) const noexcept { return t.hash(); }
};
