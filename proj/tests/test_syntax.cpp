#include <doctest.h>

#include "freedesc/syntax.hpp"
#include "gen.hpp"

using namespace freedesc;

TEST_CASE("print: spec examples") {
  CHECK(print(mk_forall("x", mk_atom("P", {mk_bound("x")}))) == "forall x. P(x)");
  TermPtr nested = mk_descr("x", mk_atom("R", {mk_bound("x"), mk_descr("y", mk_atom("S", {mk_bound("y")}))}));
  CHECK(print(nested) == "the x. (R(x, the y. (S(y))))");
  CHECK(print(mk_neq(mk_param("a"), mk_param("b"))) == "a != b");
}

TEST_CASE("parse: grammar basics") {
  FormulaPtr f = parse("forall x. P(x)");
  CHECK(f->kind == FormulaKind::Forall);
  CHECK(f->sub->kind == FormulaKind::Atom);
  CHECK(f->sub->args[0]->kind == TermKind::BoundVar);

  // free identifiers are parameters
  FormulaPtr g = parse("P(a)");
  CHECK(g->args[0]->kind == TermKind::Param);

  // E! and descriptions
  FormulaPtr h = parse("E!(the x.(P(x)))");
  CHECK(h->kind == FormulaKind::ExistsPred);
  CHECK(h->lhs->kind == TermKind::Descr);
}

TEST_CASE("parse: desugaring") {
  // phi -> psi  ==>  ~(phi & ~psi)
  FormulaPtr f = parse("P(a) -> Q(a)");
  CHECK(key_of(f) == key_of(mk_not(mk_and(parse("P(a)"), mk_not(parse("Q(a)"))))));
  // exists x phi  ==>  ~forall x ~phi
  FormulaPtr g = parse("exists x. P(x)");
  CHECK(g->kind == FormulaKind::Not);
  CHECK(g->sub->kind == FormulaKind::Forall);
  CHECK(g->sub->sub->kind == FormulaKind::Not);
  // iff
  FormulaPtr h = parse("P(a) <-> Q(a)");
  CHECK(h->kind == FormulaKind::And);
}

TEST_CASE("parse: errors") {
  CHECK_THROWS_AS(parse("forall x. forall x. P(x)"), ParseError);  // shadowing
  CHECK_THROWS_AS(parse("the x. (P(the x.(Q(x))) = a)"), ParseError);
  CHECK_THROWS_AS(parse("P(a) & P(a, b)"), ParseError);  // inconsistent arity
  CHECK_THROWS_AS(parse("E!(a)", LanguageMode::Lminus), ParseError);
  CHECK_THROWS_AS(parse("P(a"), ParseError);
  CHECK_THROWS_AS(parse(""), ParseError);
  CHECK_NOTHROW(parse("a = a", LanguageMode::Lminus));
}

TEST_CASE("alpha_normalize: identification and idempotence") {
  FormulaPtr f1 = parse("forall x. P(x)");
  FormulaPtr f2 = parse("forall y. P(y)");
  CHECK(print(alpha_normalize(f1)) == print(alpha_normalize(f2)));

  TermPtr d1 = parse("Q(the u.(P(u)))")->args[0];
  TermPtr d2 = parse("Q(the v.(P(v)))")->args[0];
  CHECK(print(alpha_normalize(d1)) == print(alpha_normalize(d2)));

  FormulaPtr n = alpha_normalize(parse("forall x. (P(x) & exists q. (q = x))"));
  CHECK(print(alpha_normalize(n)) == print(n));  // idempotent
}

TEST_CASE("substitute: spec examples") {
  // section 6: from forall x (a = iy F(x,y)) we obtain a = iy F(a,y)
  FormulaPtr q = parse("forall x. (a = the y.(F(x,y)))");
  FormulaPtr inst = substitute(q->sub, q->name, mk_param("a"));
  CHECK(key_of(inst) == key_of(parse("a = the y.(F(a,y))")));

  // no free occurrence: unchanged
  FormulaPtr p = parse("P(b)");
  CHECK(key_of(substitute(p, "x", mk_param("a"))) == key_of(p));
  FormulaPtr u = parse("forall x. P(x)");
  CHECK(key_of(substitute(u, "x", mk_param("a"))) == key_of(u));
}

TEST_CASE("dd_subterms and params_of") {
  std::vector<FormulaPtr> s1 = {parse("P(the x.(Q(x)))")};
  auto dds = dd_subterms(s1);
  REQUIRE(dds.size() == 1);
  CHECK(print(dds[0]) == print(alpha_normalize(parse("Q(the x.(Q(x)))")->args[0])));

  // nested descriptions are collected too
  std::vector<FormulaPtr> s2 = {parse("P(the x.(R(x, the y.(S(y)))))")};
  CHECK(dd_subterms(s2).size() == 2);

  std::vector<FormulaPtr> s3 = {parse("forall x. P(x)")};
  CHECK(dd_subterms(s3).empty());
  CHECK(params_of(s3).empty());

  std::vector<FormulaPtr> s4 = {parse("P(a) & a = b")};
  auto ps = params_of(s4);
  CHECK(ps == std::vector<std::string>{"a", "b"});
  CHECK(params_of(std::vector<FormulaPtr>{parse("P(the x.(Q(x)))")}).empty());

  // monotone in the input set
  std::vector<FormulaPtr> small = {parse("P(the x.(Q(x)))")};
  std::vector<FormulaPtr> big = small;
  big.push_back(parse("R(c, the z.(P(z)))"));
  auto dd_small = dd_subterms(small), dd_big = dd_subterms(big);
  for (auto& d : dd_small) {
    bool found = false;
    for (auto& e : dd_big) found = found || print(e) == print(d);
    CHECK(found);
  }
  auto p_small = params_of(small), p_big = params_of(big);
  for (auto& p : p_small)
    CHECK(std::find(p_big.begin(), p_big.end(), p) != p_big.end());
}

TEST_CASE("randomized: parse(print(f)) alpha-equals f") {
  testgen::Gen g(7);
  for (int i = 0; i < 300; ++i) {
    FormulaPtr f = g.closed_formula(3);
    FormulaPtr back = parse(print(f));
    CHECK(key_of(back) == key_of(f));
  }
}

TEST_CASE("randomized: substitution no-op when variable not free") {
  testgen::Gen g(11);
  for (int i = 0; i < 200; ++i) {
    FormulaPtr f = g.closed_formula(3);  // closed: no free bound variables
    CHECK(key_of(substitute(f, "zz", mk_param("a"))) == key_of(f));
  }
}

TEST_CASE("randomized: alpha_normalize idempotent") {
  testgen::Gen g(13);
  for (int i = 0; i < 200; ++i) {
    FormulaPtr n = alpha_normalize(g.formula(3));
    CHECK(print(alpha_normalize(n)) == print(n));
  }
}
