#pragma once

// Core value types of an asynchronous multi-context system and the pure
// operations on them: output rules, output packages, and static validation
// of a system together with an initial configuration.

#include <functional>
#include <initializer_list>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "amcs/term.hpp"

namespace amcs {

/// Identifier from [a-z0-9_]+. Contexts, sensors and output streams share
/// one namespace per system.
using Name = std::string;

/// Duplicate-free, canonically ordered.
using BeliefSet = std::set<Belief>;

std::string render_belief_set(const BeliefSet& s);

struct DataPackage {
  Name source;
  /// Sorted in canonical term order, no duplicates.
  std::vector<Info> infos;

  DataPackage() = default;
  DataPackage(Name src, std::vector<Info> items);
  DataPackage(Name src, const BeliefSet& items);

  bool contains(const Info& i) const;
  bool contains_eoc() const { return contains(eoc_atom()); }

  friend bool operator==(const DataPackage&, const DataPackage&) = default;
};

/// `src[a,b(c)]`
std::string render_package(const DataPackage& p);
DataPackage parse_package(std::string_view text);

/// Sequence of data packages. Copies share storage; appending to the
/// longest copy extends the shared storage in place, so snapshots of a
/// growing buffer cost O(1). Not safe for concurrent appends.
class InformationBuffer {
 public:
  InformationBuffer() = default;
  InformationBuffer(std::initializer_list<DataPackage> pkgs);
  explicit InformationBuffer(std::vector<DataPackage> pkgs);

  std::size_t size() const { return end_ - begin_; }
  bool empty() const { return begin_ == end_; }
  const DataPackage& operator[](std::size_t i) const { return (*store_)[begin_ + i]; }
  const DataPackage& back() const { return (*store_)[end_ - 1]; }

  void append(DataPackage p);
  /// The buffer without its first `k` packages.
  InformationBuffer drop_front(std::size_t k) const;

  bool is_prefix_of(const InformationBuffer& other) const;
  /// True when this buffer equals the last size() packages of `other`.
  bool is_suffix_of(const InformationBuffer& other) const;

  std::vector<DataPackage> to_vector() const;
  /// Same storage and window; implies equality.
  bool identical(const InformationBuffer& o) const { return same_window(o); }

  friend bool operator==(const InformationBuffer& a, const InformationBuffer& b);

 private:
  bool same_window(const InformationBuffer& o) const {
    return store_ == o.store_ && begin_ == o.begin_ && end_ == o.end_;
  }
  std::shared_ptr<std::vector<DataPackage>> store_;
  std::size_t begin_ = 0;
  std::size_t end_ = 0;
};

/// `<stakeholder, head> <- pos..., not neg...`. Rules may carry variables;
/// they are grounded against a belief set by matching positive literals in
/// order. Anonymous variables inside negative literals are existential.
struct OutputRule {
  Name stakeholder;
  Term head;
  std::vector<Term> pos;
  std::vector<Term> neg;

  bool is_ground() const;
  friend bool operator==(const OutputRule&, const OutputRule&) = default;
};

/// Text form: `stakeholder: head :- b1, not b2.` (the body is optional).
OutputRule parse_output_rule(std::string_view text);
std::string render_output_rule(const OutputRule& r);

using RuleSet = std::shared_ptr<const std::vector<OutputRule>>;
RuleSet make_rule_set(std::vector<OutputRule> rules);

/// True iff pos(r) is a subset of s and neg(r) is disjoint from s. `r` must
/// be ground.
bool body_holds(const OutputRule& r, const BeliefSet& s);

/// All ground instances of `rules` whose bodies hold under `s`.
std::vector<OutputRule> active_instances(std::span<const OutputRule> rules, const BeliefSet& s);

/// The output of `source` for `stakeholder` under belief set `s`.
DataPackage relout(const Name& source, const BeliefSet& s, std::span<const OutputRule> rules,
                   const Name& stakeholder);

std::set<Name> stakeholders(std::span<const OutputRule> rules);

// --- knowledge bases and logic suites --------------------------------------

/// Formalism-specific knowledge base content.
class KbPayload {
 public:
  virtual ~KbPayload() = default;
  /// Text form understood by the owning suite's parser.
  virtual std::string render() const = 0;
  virtual bool equals(const KbPayload& other) const = 0;
};

class KnowledgeBase {
 public:
  KnowledgeBase() = default;
  KnowledgeBase(std::string formalism, std::shared_ptr<const KbPayload> payload)
      : formalism_(std::move(formalism)), payload_(std::move(payload)) {}

  const std::string& formalism() const { return formalism_; }
  const KbPayload* payload() const { return payload_.get(); }
  template <class T>
  const T* as() const {
    return dynamic_cast<const T*>(payload_.get());
  }
  std::string render() const { return payload_ ? payload_->render() : std::string(); }
  bool same_object(const KnowledgeBase& o) const { return payload_ == o.payload_; }

  friend bool operator==(const KnowledgeBase& a, const KnowledgeBase& b);

 private:
  std::string formalism_;
  std::shared_ptr<const KbPayload> payload_;
};

struct Semantics {
  std::string id;
  /// Deterministic; returns acceptable belief sets in enumeration order.
  std::function<std::vector<BeliefSet>(const KnowledgeBase&)> evaluate;
};

struct LogicSuite {
  std::string tag;
  std::function<bool(const KnowledgeBase&)> admissible;
  std::vector<Semantics> semantics;
  /// Inverse of KnowledgeBase::render for this formalism.
  std::function<KnowledgeBase(std::string_view)> parse_kb;

  const Semantics* find(std::string_view id) const;
};

using SuitePtr = std::shared_ptr<const LogicSuite>;

struct Context {
  Name name;
  SuitePtr suite;
};

struct AMCSSpec {
  std::vector<Context> contexts;
  std::vector<Name> output_streams;
  std::vector<Name> sensors;

  /// Index of a context, or -1.
  int context_index(std::string_view name) const;
  /// Index of an output stream, or -1.
  int stream_index(std::string_view name) const;
  bool is_sensor(std::string_view name) const;
  /// Context and output-stream names.
  bool in_names(std::string_view name) const {
    return context_index(name) >= 0 || stream_index(name) >= 0;
  }
};

// --- configurations -------------------------------------------------------

struct ContextConfiguration;

/// Computation controller: true means a computation should take place.
using Controller = std::function<bool(const KnowledgeBase&, const InformationBuffer&)>;

/// Context update function. Receives the current configuration so that it can
/// carry over semantics and management it does not change. The returned
/// buffer must be a suffix of `buffer`.
using Updater = std::function<ContextConfiguration(
    const InformationBuffer& buffer, const KnowledgeBase& kb, const ContextConfiguration& current)>;

struct ContextManagement {
  Controller controller;
  Updater updater;
  RuleSet rules;
};

struct ContextConfiguration {
  KnowledgeBase kb;
  std::string semantics;
  InformationBuffer buffer;
  ContextManagement management;

  std::span<const OutputRule> rules() const {
    return management.rules ? std::span<const OutputRule>(*management.rules)
                            : std::span<const OutputRule>();
  }
};

struct SystemConfiguration {
  std::vector<ContextConfiguration> contexts;
  std::vector<InformationBuffer> streams;
};

// --- violations -----------------------------------------------------------

enum class Condition { I, II, III, IV, V, Suffix, Def5 };

std::string_view condition_tag(Condition c);

struct Violation {
  Condition condition;
  long long time = 0;
  Name where;
  std::string message;
};

std::string render_violation(const Violation& v);

/// Empty iff names are valid and pairwise distinct, every rule stakeholder is
/// a context or output stream, no rule head is eoc, every active semantics
/// exists in its suite, every kb is admissible, and every output-stream
/// package has a context as source.
std::vector<Violation> validate_system(const AMCSSpec& spec, const SystemConfiguration& init);

}  // namespace amcs
