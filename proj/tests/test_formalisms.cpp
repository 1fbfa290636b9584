#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "amcs/formalisms.hpp"
#include "oracles.hpp"

using namespace amcs;

namespace {

BeliefSet beliefs(std::initializer_list<const char*> atoms) {
  BeliefSet s;
  for (const char* a : atoms) s.insert(parse_term(a));
  return s;
}

InformationBuffer buffer(std::initializer_list<const char*> pkgs) {
  InformationBuffer b;
  for (const char* p : pkgs) b.append(parse_package(p));
  return b;
}

bool ready(std::string_view policy, const InformationBuffer& b, const Program& kb = {}) {
  return make_controller(parse_controller_policy(policy))(make_kb(kFactSuite, kb), b);
}

ContextConfiguration fact_context(const Program& kb) {
  ContextConfiguration c;
  c.kb = make_kb(kFactSuite, kb);
  c.semantics = "identity";
  return c;
}

std::set<Info> facts_after(const UpdatePolicy& policy, const InformationBuffer& b, const char* kb_text) {
  Program kb = parse_program(kb_text);
  ContextConfiguration cur = fact_context(kb);
  return program_of(updater_append_facts(b, cur.kb, cur, policy).kb).facts;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("fact store semantics") {
  CHECK(factstore_semantics(Program{}) == std::vector<BeliefSet>{BeliefSet{}});
  CHECK(factstore_semantics(parse_program("a.\nb.")) == std::vector<BeliefSet>{beliefs({"a", "b"})});
  CHECK(factstore_semantics(parse_program("avail(a1,l2).")) ==
        std::vector<BeliefSet>{beliefs({"avail(a1,l2)"})});
}

TEST_CASE("forward chaining") {
  Program p = parse_program(
      "avail(a1,l1).\n"
      "case(c1,l2,2).\n"
      "sugassignment(A,C) :- avail(A,_), case(C,_,_).");
  BeliefSet m = perfect_model(p);
  CHECK(m.contains(parse_term("sugassignment(a1,c1)")));
  CHECK(m.size() == 3);

  CHECK(perfect_model(parse_program("a.\nb(c).")) == beliefs({"a", "b(c)"}));
  CHECK(perfect_model(parse_program("p :- not q.")) == beliefs({"p"}));
  CHECK(oracle::stable_models(parse_program("p :- not q.")).size() == 1);
  CHECK(forward_chain(parse_program("p :- not q.")) == std::vector<BeliefSet>{beliefs({"p"})});
}

TEST_CASE("builtins") {
  Program p = parse_program(
      "v(1).\nv(2).\nv(10).\n"
      "less(X,Y) :- v(X), v(Y), lt(X,Y).\n"
      "same(X) :- v(X), le(X,X).\n"
      "other(X,Y) :- v(X), v(Y), neq(X,Y).");
  BeliefSet m = perfect_model(p);
  CHECK(m.contains(parse_term("less(2,10)")));
  CHECK_FALSE(m.contains(parse_term("less(10,2)")));
  CHECK(m.contains(parse_term("same(10)")));
  CHECK_FALSE(m.contains(parse_term("other(1,1)")));
  CHECK(m.contains(parse_term("other(1,10)")));
}

TEST_CASE("program checks") {
  CHECK_THROWS_AS(parse_program("p(X) :- not q(X)."), ProgramError);
  CHECK_THROWS_AS(parse_program("p(X) :- q."), ProgramError);
  CHECK_THROWS_AS(parse_program("p :- not q.\nq :- not p."), ProgramError);
  CHECK_THROWS_AS(parse_program("p :- not p."), ProgramError);
  CHECK_NOTHROW(parse_program("p :- q.\nq :- p."));
  CHECK(is_stratified(parse_program("a :- not b.\nb :- c.")));
  Program cyc;
  cyc.rules.push_back(parse_rule("a :- not b."));
  cyc.rules.push_back(parse_rule("b :- not a."));
  CHECK_FALSE(is_stratified(cyc));
}

TEST_CASE("program text round-trip") {
  Program p = parse_program(
      "% comment\n"
      "a.\n"
      "q(X) :- p(X), not r(X).\n"
      "choice {x; y(b)}.");
  CHECK(p.facts.size() == 1);
  CHECK(p.rules.size() == 1);
  REQUIRE(p.choices.size() == 1);
  CHECK(p.choices[0].size() == 2);
  CHECK(parse_program(p.render()) == p);
}

TEST_CASE("choice enumeration") {
  CHECK(enumerate_choices(parse_program("choice {a; b}.")) ==
        std::vector<BeliefSet>{beliefs({"a"}), beliefs({"b"})});
  Program base = parse_program("x.\ny :- x.");
  CHECK(enumerate_choices(base) == std::vector<BeliefSet>{perfect_model(base)});
  CHECK(enumerate_choices(parse_program("choice {a; b}.\nchoice {c}.")) ==
        std::vector<BeliefSet>{beliefs({"a", "c"}), beliefs({"b", "c"})});
  CHECK(enumerate_choices(parse_program("choice {a; a}.")) == std::vector<BeliefSet>{beliefs({"a"})});
  CHECK(enumerate_choices(parse_program("choice {a; b}.\nc :- a.")) ==
        std::vector<BeliefSet>{beliefs({"a", "c"}), beliefs({"b"})});
}

TEST_CASE("suites") {
  Program choices = parse_program("choice {a; b}.");
  KnowledgeBase kb = make_kb(kChoiceSuite, choices);
  SuitePtr s = choice_suite();
  CHECK(s->find("all")->evaluate(kb).size() == 2);
  CHECK(s->find("first")->evaluate(kb) == std::vector<BeliefSet>{beliefs({"a"})});
  CHECK(s->find("stable") == nullptr);

  CHECK(fact_suite()->admissible(make_kb(kFactSuite, parse_program("a."))));
  CHECK_FALSE(fact_suite()->admissible(make_kb(kFactSuite, parse_program("a :- b."))));
  CHECK_FALSE(rule_suite()->admissible(make_kb(kRuleSuite, choices)));
  CHECK(rule_suite()->admissible(make_kb(kRuleSuite, parse_program("a :- b."))));
  CHECK(rule_suite()->parse_kb("a.\nb :- a.").render() == make_kb(kRuleSuite, parse_program("a.\nb :- a.")).render());
}

TEST_CASE("controllers") {
  CHECK(ready("always", {}));
  CHECK_FALSE(ready("wait_for_sources(ca)", buffer({"mo[x]"})));
  CHECK(ready("wait_for_sources(ca)", buffer({"ca[case(c1,l3,2)]"})));
  CHECK_FALSE(ready("wait_for_sources(ca,mo)", buffer({"ca[a]"})));
  CHECK_FALSE(ready("wait_for_eoc(na)", buffer({"na[eta(c1,a1,7)]"})));
  CHECK(ready("wait_for_eoc(na)", buffer({"na[eta(c1,a1,7)]", "na[eoc]"})));
  CHECK_FALSE(ready("nonempty_buffer", {}));
  CHECK(ready("nonempty_buffer", buffer({"x[]"})));

  CHECK(ready("novel_info", buffer({"s[a]"})));
  CHECK_FALSE(ready("novel_info", buffer({"s[a]"}), parse_program("a.")));
  CHECK_FALSE(ready("novel_info", buffer({"s[eoc]"})));
  CHECK_FALSE(ready("novel_info", {}));

  ControllerPolicy p = parse_controller_policy("novel_info");
  p.ignore.push_back(parse_ignore("retry(N) if round(N)"));
  auto c = make_controller(p);
  CHECK_FALSE(c(make_kb(kFactSuite, parse_program("round(1).")), buffer({"g[retry(1)]"})));
  CHECK(c(make_kb(kFactSuite, parse_program("round(2).")), buffer({"g[retry(1)]"})));

  for (std::string_view text : {"always", "nonempty_buffer", "novel_info", "wait_for_sources(a,b)", "wait_for_eoc(a)"})
    CHECK(render_controller_policy(parse_controller_policy(text)) == text);
  CHECK_THROWS(parse_controller_policy("sometimes"));
}

TEST_CASE("append updater") {
  UpdatePolicy none;
  CHECK(facts_after(none, buffer({"s1[a]"}), "b.") == std::set<Info>{parse_term("a"), parse_term("b")});
  CHECK(facts_after(none, buffer({"na[eoc]"}), "b.") == std::set<Info>{parse_term("b")});

  UpdatePolicy forget;
  forget.forget.push_back(parse_forget("avail(A,_) on assign(A,_)"));
  CHECK(facts_after(forget, buffer({"cd[assign(a1,c1)]"}), "avail(a1,l1).\navail(a2,l2).") ==
        std::set<Info>{parse_term("assign(a1,c1)"), parse_term("avail(a2,l2)")});

  UpdatePolicy plain;
  plain.forget.push_back(parse_forget("avail(a1,_)"));
  CHECK(facts_after(plain, buffer({"x[assign(a1,c1)]"}), "avail(a1,l1).") ==
        std::set<Info>{parse_term("assign(a1,c1)")});

  SUBCASE("buffer consumed, management kept") {
    ContextConfiguration cur = fact_context(parse_program("b."));
    cur.management.rules = make_rule_set({parse_output_rule("o: a :- b.")});
    auto next = updater_append_facts(buffer({"s[a]", "t[c]"}), cur.kb, cur, none);
    CHECK(next.buffer.empty());
    CHECK(next.semantics == "identity");
    CHECK(next.management.rules == cur.management.rules);
  }
  SUBCASE("max packages leaves a suffix") {
    UpdatePolicy one;
    one.max_packages = 1;
    ContextConfiguration cur = fact_context({});
    InformationBuffer b = buffer({"s[a]", "t[c]"});
    auto next = updater_append_facts(b, cur.kb, cur, one);
    CHECK(program_of(next.kb).facts == std::set<Info>{parse_term("a")});
    CHECK(next.buffer.size() == 1);
    CHECK(next.buffer.is_suffix_of(b));
  }
  SUBCASE("ignored infos") {
    UpdatePolicy ig;
    ig.ignore.push_back(parse_ignore("retry(N) if round(N)"));
    CHECK(facts_after(ig, buffer({"g[retry(1)]", "g[retry(2)]"}), "round(1).") ==
          std::set<Info>{parse_term("round(1)"), parse_term("retry(2)")});
  }
}

TEST_CASE("filter text") {
  CHECK(render_forget(parse_forget("avail(A,_) on assign(A,_)")) == "forget avail(A,_) on assign(A,_).");
  CHECK(render_forget(parse_forget("p(_)")) == "forget p(_).");
  CHECK(render_ignore(parse_ignore("retry(N) if round(N)")) == "ignore retry(N) if round(N).");
}

TEST_CASE("perfect model agrees with the stable-model enumerator") {
  oracle::Gen g(5);
  for (int i = 0; i < 200; ++i) {
    Program p = oracle::random_stratified_program(g);
    CAPTURE(p.render());
    auto models = oracle::stable_models(p);
    REQUIRE(models.size() == 1);
    CHECK(models.front() == perfect_model(p));
  }
}

TEST_CASE("choice enumeration agrees with the cross-product oracle") {
  oracle::Gen g(6);
  for (int i = 0; i < 100; ++i) {
    Program p = oracle::random_stratified_program(g, true);
    CAPTURE(p.render());
    auto expected = oracle::choice_models(p);
    CHECK(enumerate_choices(p) == std::vector<BeliefSet>(expected.begin(), expected.end()));
  }
}

TEST_CASE("program corpus") {
  int n = 0;
  for (const auto& e : std::filesystem::directory_iterator(AMCS_DATA_DIR "/programs")) {
    if (e.path().extension() != ".lp") continue;
    ++n;
    CAPTURE(e.path().string());
    Program p = parse_program(slurp(e.path()));
    auto models = oracle::stable_models(p);
    REQUIRE(models.size() == 1);
    CHECK(models.front() == perfect_model(p));
  }
  CHECK(n >= 5);

  BeliefSet birds = perfect_model(parse_program(slurp(AMCS_DATA_DIR "/programs/layers.lp")));
  CHECK(birds.contains(parse_term("flies(tweety)")));
  CHECK(birds.contains(parse_term("grounded(pingu)")));
  CHECK_FALSE(birds.contains(parse_term("flies(pingu)")));
}
