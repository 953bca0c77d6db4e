#include <doctest.h>

#include "freedesc/countermodel.hpp"
#include "freedesc/engine.hpp"

using namespace freedesc;

namespace {

SearchResult run(Logic logic, const char* text, bool satisfy = false) {
  Problem p;
  p.logic = logic;
  p.goal = parse(text, logic == Logic::NQFLminus ? LanguageMode::Lminus : LanguageMode::L);
  p.satisfy = satisfy;
  return search(p);
}

BranchView rebuild(const SearchResult& r, Logic logic) {
  BranchView b;
  for (auto& k : r.open_branch)
    b.add(alpha_normalize(
        parse(k, logic == Logic::NQFLminus ? LanguageMode::Lminus : LanguageMode::L)));
  return b;
}

}  // namespace

TEST_CASE("extraction: term classes and the extra object") {
  BranchView b;
  b.add(alpha_normalize(parse("a = b")));
  b.add(alpha_normalize(parse("b = c")));
  b.add(alpha_normalize(parse("P(a)")));
  ExtractedModel em = extract_model(b, Logic::PFL);
  // one class {a,b,c} plus the extra object o
  CHECK(em.model.D.size() == 2);
  CHECK(em.term_elem.at("a") == em.term_elem.at("b"));
  CHECK(em.term_elem.at("b") == em.term_elem.at("c"));
  CHECK(em.extra != em.term_elem.at("a"));
  // representative: least parameter in the fixed order
  CHECK(em.class_reps.at(em.term_elem.at("a")) == "a");
  CHECK(em.v.at("a") == em.term_elem.at("a"));
}

TEST_CASE("extraction: DE from existence atoms, description classes") {
  BranchView b;
  b.add(alpha_normalize(parse("a = the x.(P(x))")));
  b.add(alpha_normalize(parse("E!(a)")));
  b.add(alpha_normalize(parse("P(a)")));
  ExtractedModel em = extract_model(b, Logic::PFL);
  Elem ea = em.term_elem.at("a");
  CHECK(em.model.DE.count(ea) == 1);
  // the description shares a's class
  std::string dk = print(dd_subterms(b.formulas)[0]);
  CHECK(em.term_elem.at(dk) == ea);
  CHECK(verify_model(em, b, Logic::PFL).empty());
}

TEST_CASE("the section 6 run: extraction verifies, DE singleton") {
  SearchResult r = run(Logic::PQFL, "forall x. (a = the y.(F(x,y)))", true);
  REQUIRE(r.verdict == Verdict::Refuted);
  REQUIRE(r.model);
  CHECK(r.model->model.DE.size() == 1);
  BranchView b = rebuild(r, Logic::PQFL);
  CHECK(verify_model(*r.model, b, Logic::PQFL).empty());
}

TEST_CASE("negative control: corrupted models fail verification") {
  SearchResult r = run(Logic::PQFL, "forall x. (a = the y.(F(x,y)))", true);
  REQUIRE(r.verdict == Verdict::Refuted);
  BranchView b = rebuild(r, Logic::PQFL);

  ExtractedModel dropped = *r.model;
  REQUIRE_FALSE(dropped.model.I["F"].empty());
  dropped.model.I["F"].erase(dropped.model.I["F"].begin());
  CHECK_FALSE(verify_model(dropped, b, Logic::PQFL).empty());

  ExtractedModel shifted = *r.model;
  shifted.model.DE.clear();
  CHECK_FALSE(verify_model(shifted, b, Logic::PQFL).empty());
}

TEST_CASE("NQFL: improper self-identity refuted by strictness") {
  SearchResult r = run(Logic::NQFL, "the x.(P(x)) = the x.(P(x))");
  REQUIRE(r.verdict == Verdict::Refuted);
  REQUIRE(r.model);
  BranchView b = rebuild(r, Logic::NQFL);
  CHECK(verify_model(*r.model, b, Logic::NQFL).empty());
  CHECK_FALSE(eval_closed(r.model->model, r.model->v,
                          parse("the x.(P(x)) = the x.(P(x))"), Logic::NQFL));
}

TEST_CASE("every DE element is a parameter class") {
  SearchResult r = run(Logic::NQFL, "(P(a) & Q(b)) -> a = b");
  REQUIRE(r.verdict == Verdict::Refuted);
  const ExtractedModel& em = *r.model;
  for (Elem e : em.model.DE) {
    if (e == em.extra) continue;
    bool covered = false;
    for (auto& [p, el] : em.v) covered = covered || el == e;
    CHECK(covered);
  }
}
