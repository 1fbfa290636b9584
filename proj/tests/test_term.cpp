#include <doctest.h>

#include "amcs/term.hpp"
#include "oracles.hpp"

using namespace amcs;

namespace {

Term random_term(oracle::Gen& g, int depth) {
  static const std::vector<std::string> names{"a", "b1", "case", "eta", "x_y", "7", "0", "l3"};
  if (depth == 0 || g.coin(35)) return Term::symbol(g.pick(names));
  int n = g.range(1, 3);
  std::vector<Term> args;
  for (int i = 0; i < n; ++i) args.push_back(random_term(g, depth - 1));
  return Term::compound(g.pick(names), std::move(args));
}

}  // namespace

TEST_CASE("parse_term") {
  CHECK(is_eoc(parse_term("eoc")));
  CHECK(parse_term("eoc") == eoc_atom());

  Term c = parse_term("case(c1,l3,high)");
  CHECK(c.is_compound());
  CHECK(c.name() == "case");
  REQUIRE(c.arity() == 3);
  CHECK(c.arg(0) == Term::symbol("c1"));
  CHECK(c.arg(2) == Term::symbol("high"));

  CHECK(parse_term("  case( c1 , l3,high ) ") == c);

  try {
    parse_term("case(c1,");
    FAIL("expected a syntax error");
  } catch (const SyntaxError& e) {
    CHECK(e.column() == 9);
  }
  CHECK_THROWS_AS(parse_term(""), SyntaxError);
  CHECK_THROWS_AS(parse_term("p(X)"), SyntaxError);
  CHECK_THROWS_AS(parse_term("p(a))"), SyntaxError);
  CHECK_THROWS_AS(parse_term("Foo"), SyntaxError);
}

TEST_CASE("render_term") {
  CHECK(render_term(Term::symbol("a")) == "a");
  CHECK(render_term(parse_term("case(c1,l3,high)")) == "case(c1,l3,high)");
  CHECK(render_term(parse_term("eta(c1, amb(a2), 7)")) == "eta(c1,amb(a2),7)");
  CHECK(render_term(parse_pattern("p(X,_)")) == "p(X,_)");
}

TEST_CASE("parse and render round-trip on random terms") {
  oracle::Gen g(11);
  for (int i = 0; i < 2000; ++i) {
    Term t = random_term(g, 5);
    CHECK(parse_term(render_term(t)) == t);
  }
}

TEST_CASE("integers") {
  CHECK(parse_term("42").is_integer());
  CHECK(parse_term("42").as_integer() == 42);
  CHECK_FALSE(parse_term("a42").is_integer());
}

TEST_CASE("term order and equality") {
  Term a = parse_term("p(a,b)"), b = parse_term("p(a,b)"), c = parse_term("p(a,c)");
  CHECK(a == b);
  CHECK(a.hash() == b.hash());
  CHECK(a != c);
  CHECK(((a < c) != (c < a)));
}

TEST_CASE("parse_term_list") {
  CHECK(parse_term_list("", false).empty());
  auto l = parse_term_list("a, p(b,c), q", false);
  REQUIRE(l.size() == 3);
  CHECK(l[1] == parse_term("p(b,c)"));
  CHECK_THROWS_AS(parse_term_list("a, X", false), SyntaxError);
  CHECK(parse_term_list("a, X", true)[1].is_variable());
}

TEST_CASE("split_top_level") {
  auto parts = split_top_level("p(a,b), q, r(c,d(e,f))", ',');
  REQUIRE(parts.size() == 3);
  CHECK(parts[0] == "p(a,b)");
  CHECK(parts[2] == "r(c,d(e,f))");
}

TEST_CASE("match and substitute") {
  Bindings b;
  CHECK(match(parse_pattern("assign(A,C)"), parse_term("assign(a1,c1)"), b));
  CHECK(render_term(substitute(parse_pattern("x(C,A)"), b)) == "x(c1,a1)");

  Bindings r;
  CHECK_FALSE(match(parse_pattern("p(X,X)"), parse_term("p(a,b)"), r));
  CHECK(r.size() == 0);
  CHECK(match(parse_pattern("p(X,X)"), parse_term("p(a,a)"), r));

  Bindings anon;
  CHECK(match(parse_pattern("p(_,_)"), parse_term("p(a,b)"), anon));
  CHECK(anon.size() == 0);

  Bindings partial;
  CHECK(match(parse_pattern("q(Y)"), parse_term("q(z)"), partial));
  CHECK(render_term(substitute(parse_pattern("r(Y,Z)"), partial)) == "r(z,Z)");
}
