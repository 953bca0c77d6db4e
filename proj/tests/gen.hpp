#pragma once

// Shared randomized generators for the test suite: small formulas over
// parameters {a, b} and unary predicates {P, Q}, and random finite models.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "freedesc/semantics.hpp"
#include "freedesc/syntax.hpp"

namespace testgen {

using namespace freedesc;

struct Gen {
  std::mt19937_64 rng;
  explicit Gen(std::uint64_t seed) : rng(seed) {}

  int pick(int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); }
  std::string param() { return pick(2) ? "b" : "a"; }
  std::string pred() { return pick(2) ? "Q" : "P"; }

  // description body with exactly the binder free
  FormulaPtr body(const std::string& x) {
    switch (pick(4)) {
      case 0: return mk_atom("P", {mk_bound(x)});
      case 1: return mk_atom("Q", {mk_bound(x)});
      case 2: return mk_and(mk_atom("P", {mk_bound(x)}), mk_atom("Q", {mk_bound(x)}));
      default: return mk_not(mk_atom("Q", {mk_bound(x)}));
    }
  }
  TermPtr dd() { return alpha_normalize(mk_descr("x", body("x"))); }
  TermPtr term(bool allow_dd = true) {
    if (allow_dd && pick(3) == 0) return dd();
    return mk_param(param());
  }

  FormulaPtr atom(bool allow_E = true, bool allow_dd = true) {
    switch (pick(allow_E ? 3 : 2)) {
      case 0: return mk_atom(pred(), {term(allow_dd)});
      case 1: return mk_eq(term(allow_dd), term(allow_dd));
      default: return mk_exists_pred(term(allow_dd));
    }
  }

  // closed formula of the core grammar; quantifier bodies stay simple so the
  // result remains closed-DD
  FormulaPtr formula(int depth, bool allow_E = true, bool allow_dd = true) {
    if (depth <= 0) return atom(allow_E, allow_dd);
    switch (pick(5)) {
      case 0: return mk_not(formula(depth - 1, allow_E, allow_dd));
      case 1:
        return mk_and(formula(depth - 1, allow_E, allow_dd),
                      formula(depth - 1, allow_E, allow_dd));
      case 2: {
        FormulaPtr b = pick(2) ? mk_atom(pred(), {mk_bound("w")})
                               : mk_eq(mk_bound("w"), mk_param(param()));
        return mk_forall("w", b);
      }
      default: return atom(allow_E, allow_dd);
    }
  }
  FormulaPtr closed_formula(int depth, bool allow_E = true, bool allow_dd = true) {
    return alpha_normalize(formula(depth, allow_E, allow_dd));
  }

  // a random model over {0..size-1} with unary P, Q and outer entries for the
  // given closed descriptions (value drawn from D\DE when nonempty, else D)
  Model model(int size, const std::vector<TermPtr>& dds = {}) {
    Model m;
    for (Elem e = 0; e < size; ++e) m.D.push_back(e);
    for (Elem e = 0; e < size; ++e)
      if (pick(2)) m.DE.insert(e);
    for (const char* p : {"P", "Q"}) {
      m.I.emplace(p, std::set<std::vector<Elem>>{});
      for (Elem e = 0; e < size; ++e)
        if (pick(2)) m.I[p].insert({e});
    }
    std::vector<Elem> outer_dom;
    for (Elem e : m.D)
      if (!m.DE.count(e)) outer_dom.push_back(e);
    if (outer_dom.empty()) outer_dom = m.D;
    for (auto& d : dds) {
      OuterEntry oe;
      oe.descr = print(d);
      oe.val = outer_dom[static_cast<size_t>(pick(static_cast<int>(outer_dom.size())))];
      m.outer.push_back(std::move(oe));
    }
    return m;
  }
};

}  // namespace testgen
