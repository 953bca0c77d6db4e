#pragma once

// Independent brute-force validity/satisfiability decisions at desk scale by
// enumerating finite dual-domain models, used to cross-check the prover and
// to empirically validate rule soundness. Only closed descriptions are
// admitted to enumeration (open ones would require enumerating denotation
// functions over assignments).

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "freedesc/calculus.hpp"
#include "freedesc/logic.hpp"
#include "freedesc/semantics.hpp"
#include "freedesc/syntax.hpp"

namespace freedesc {

struct EnumerationSpace {
  int max_domain = 3;
  std::map<std::string, size_t> preds;  // name -> arity
  std::vector<std::string> params;
  std::vector<TermPtr> dds;  // closed, alpha-normal, deduplicated
  Logic logic = Logic::PFL;
  bool require_empty_de = false;
  bool require_nonempty_de = false;
};

namespace detail {

inline void collect_preds(const FormulaPtr& f, std::map<std::string, size_t>& out);

inline void collect_preds(const TermPtr& t, std::map<std::string, size_t>& out) {
  if (t->kind == TermKind::Descr) collect_preds(t->body, out);
}

inline void collect_preds(const FormulaPtr& f, std::map<std::string, size_t>& out) {
  switch (f->kind) {
    case FormulaKind::Atom:
      out.emplace(f->name, f->args.size());
      for (auto& a : f->args) collect_preds(a, out);
      break;
    case FormulaKind::Eq:
      collect_preds(f->lhs, out);
      collect_preds(f->rhs, out);
      break;
    case FormulaKind::ExistsPred:
      collect_preds(f->lhs, out);
      break;
    case FormulaKind::Not:
      collect_preds(f->sub, out);
      break;
    case FormulaKind::And:
      collect_preds(f->sub, out);
      collect_preds(f->sub2, out);
      break;
    case FormulaKind::Forall:
      collect_preds(f->sub, out);
      break;
    default:
      throw std::invalid_argument("collect_preds: formula must be desugared");
  }
}

}  // namespace detail

inline EnumerationSpace space_for(const std::vector<FormulaPtr>& formulas, Logic logic,
                                  int max_domain, bool allow_open_dds = false) {
  EnumerationSpace sp;
  sp.max_domain = max_domain;
  sp.logic = logic;
  for (auto& f : formulas) detail::collect_preds(f, sp.preds);
  sp.params = params_of(formulas);
  for (auto& d : dd_subterms(formulas)) {
    if (!term_closed(d)) {
      if (allow_open_dds) continue;
      throw std::invalid_argument("oracle: open definite description " + print(d));
    }
    sp.dds.push_back(d);
  }
  return sp;
}

// Enumerates every model of the space with |D| <= max_domain, in the order:
// increasing |D|, then lexicographic over (DE, I, v, outer). A reserve outer
// element is appended when descriptions are present but D\DE would be empty.
// fn(Model, Env) -> bool; returning true stops the enumeration. Returns
// whether the enumeration was stopped.
template <typename Fn>
bool enumerate_models(const EnumerationSpace& sp, Fn&& fn) {
  if (sp.max_domain < 1) throw std::invalid_argument("oracle: domain bound must be >= 1");
  const bool quasi = is_quasi(sp.logic);
  for (int m = 1; m <= sp.max_domain; ++m) {
    for (unsigned de_mask = 0; de_mask < (1u << m); ++de_mask) {
      if (sp.require_empty_de && de_mask != 0) continue;
      if (sp.require_nonempty_de && de_mask == 0) continue;
      if (quasi && de_mask == 0 && !sp.params.empty()) continue;  // no assignment exists

      Model model;
      for (int e = 0; e < m; ++e) model.D.push_back(e);
      for (int e = 0; e < m; ++e)
        if (de_mask & (1u << e)) model.DE.insert(e);
      if (!sp.dds.empty() && static_cast<int>(model.DE.size()) == m)
        model.D.push_back(m);  // reserve outer element

      std::vector<Elem> outer_domain;
      for (Elem e : model.D)
        if (!model.DE.count(e)) outer_domain.push_back(e);

      std::vector<Elem> assign_domain;
      if (quasi) assign_domain.assign(model.DE.begin(), model.DE.end());
      else assign_domain = model.D;

      // interpretation odometer: one bitmask per predicate
      const size_t n_eff = model.D.size();
      std::vector<std::string> pred_names;
      std::vector<size_t> tuple_counts;
      for (auto& [p, arity] : sp.preds) {
        size_t cnt = 1;
        for (size_t i = 0; i < arity; ++i) cnt *= n_eff;
        if (cnt > 20) throw std::invalid_argument("oracle: interpretation space too large");
        pred_names.push_back(p);
        tuple_counts.push_back(cnt);
      }
      std::vector<std::uint64_t> masks(pred_names.size(), 0);
      auto decode_tuple = [&](size_t idx, size_t arity) {
        std::vector<Elem> tup(arity);
        for (size_t i = arity; i-- > 0;) {
          tup[i] = model.D[idx % n_eff];
          idx /= n_eff;
        }
        return tup;
      };

      while (true) {
        model.I.clear();
        for (size_t p = 0; p < pred_names.size(); ++p) {
          auto& tuples = model.I[pred_names[p]];
          size_t arity = sp.preds.at(pred_names[p]);
          for (size_t t = 0; t < tuple_counts[p]; ++t)
            if (masks[p] & (1ull << t)) tuples.insert(decode_tuple(t, arity));
        }

        // assignments
        std::vector<size_t> vidx(sp.params.size(), 0);
        bool v_possible = sp.params.empty() || !assign_domain.empty();
        while (v_possible) {
          Env env;
          for (size_t i = 0; i < sp.params.size(); ++i)
            env[sp.params[i]] = assign_domain[vidx[i]];

          // outer choices
          std::vector<size_t> oidx(sp.dds.size(), 0);
          bool o_possible = sp.dds.empty() || !outer_domain.empty();
          while (o_possible) {
            model.outer.clear();
            for (size_t i = 0; i < sp.dds.size(); ++i) {
              OuterEntry oe;
              oe.descr = print(sp.dds[i]);
              oe.val = outer_domain[oidx[i]];
              model.outer.push_back(std::move(oe));
            }
            if (fn(model, env)) return true;
            // advance outer odometer
            size_t i = 0;
            for (; i < sp.dds.size(); ++i) {
              if (++oidx[i] < outer_domain.size()) break;
              oidx[i] = 0;
            }
            if (i == sp.dds.size()) break;
          }

          size_t i = 0;
          for (; i < sp.params.size(); ++i) {
            if (++vidx[i] < assign_domain.size()) break;
            vidx[i] = 0;
          }
          if (i == sp.params.size()) break;
        }

        size_t p = 0;
        for (; p < pred_names.size(); ++p) {
          if (++masks[p] < (1ull << tuple_counts[p])) break;
          masks[p] = 0;
        }
        if (p == pred_names.size()) break;
      }
    }
  }
  return false;
}

// ---------------------------------------------------------------------------
// top-level oracle queries

// First (model, assignment) satisfying all formulas, if any within the bound.
inline std::optional<std::pair<Model, Env>> oracle_satisfiable(
    const std::vector<FormulaPtr>& formulas, Logic logic, int max_domain) {
  EnumerationSpace sp = space_for(formulas, logic, max_domain);
  std::optional<std::pair<Model, Env>> found;
  enumerate_models(sp, [&](const Model& m, const Env& v) {
    for (auto& f : formulas)
      if (!eval_closed(m, v, f, logic)) return false;
    found = {m, v};
    return true;
  });
  return found;
}

// First (model, assignment) falsifying the formula; nullopt means
// valid-up-to-bound (NOT a proof of validity).
inline std::optional<std::pair<Model, Env>> oracle_validity(const FormulaPtr& goal,
                                                            Logic logic, int max_domain) {
  EnumerationSpace sp = space_for({goal}, logic, max_domain);
  std::optional<std::pair<Model, Env>> found;
  enumerate_models(sp, [&](const Model& m, const Env& v) {
    if (eval_closed(m, v, goal, logic)) return false;
    found = {m, v};
    return true;
  });
  return found;
}

// Decides satisfiability of a parameter-free formula set in a quasi-free
// logic over models with DE = {} (where quantifiers are vacuous and no
// description body is ever evaluated, so the bound #closed-DDs + 1 is
// complete). Open descriptions are permitted: they are never interpreted.
inline std::optional<Model> de_empty_satisfiable(const std::vector<FormulaPtr>& formulas,
                                                 Logic logic) {
  if (!is_quasi(logic))
    throw std::invalid_argument("de_empty_satisfiable: quasi-free logics only");
  if (!params_of(formulas).empty())
    throw std::invalid_argument("de_empty_satisfiable: parameter-free sets only");
  EnumerationSpace sp = space_for(formulas, logic, 1, /*allow_open_dds=*/true);
  sp.max_domain = static_cast<int>(sp.dds.size()) + 1;
  sp.require_empty_de = true;
  std::optional<Model> found;
  enumerate_models(sp, [&](const Model& m, const Env& v) {
    for (auto& f : formulas)
      if (!eval_closed(m, v, f, logic)) return false;
    found = m;
    return true;
  });
  return found;
}

// ---------------------------------------------------------------------------
// randomized rule soundness (Lemma 3): for random premise sets matching the
// rule schema that are satisfiable within the bound, some conclusion set must
// be jointly satisfiable with them within the bound.

struct SoundnessReport {
  Rule rule;
  Logic logic;
  int samples = 0;
  int satisfiable_premises = 0;
  std::vector<std::string> counterexamples;  // printed premise sets
};

namespace detail {

// small random closed formulas over parameters {a,b}, unary predicates
// {P,Q}, and simple closed descriptions
struct RuleSampler {
  std::mt19937_64 rng;
  explicit RuleSampler(std::uint64_t seed) : rng(seed) {}

  int pick(int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); }
  std::string param() { return pick(2) ? "b" : "a"; }
  std::string pred() { return pick(2) ? "Q" : "P"; }

  // body with exactly the iota variable free
  FormulaPtr body(const std::string& x) {
    switch (pick(4)) {
      case 0: return mk_atom("P", {mk_bound(x)});
      case 1: return mk_atom("Q", {mk_bound(x)});
      case 2: return mk_and(mk_atom("P", {mk_bound(x)}), mk_atom("Q", {mk_bound(x)}));
      default: return mk_not(mk_atom("P", {mk_bound(x)}));
    }
  }
  TermPtr dd() { return alpha_normalize(mk_descr("x", body("x"))); }
  TermPtr term() {
    switch (pick(3)) {
      case 0: return mk_param(param());
      default: return dd();
    }
  }
  FormulaPtr atom() {
    switch (pick(3)) {
      case 0: return mk_atom(pred(), {term()});
      case 1: return mk_eq(term(), term());
      default: return mk_exists_pred(term());
    }
  }
  FormulaPtr formula(int depth = 2) {
    if (depth == 0) return atom();
    switch (pick(4)) {
      case 0: return mk_not(formula(depth - 1));
      case 1: return mk_and(formula(depth - 1), formula(depth - 1));
      case 2: {
        std::string x = "z";
        return mk_forall(x, mk_atom(pred(), {mk_bound(x)}));
      }
      default: return atom();
    }
  }
  FormulaPtr closed_formula(int depth = 2) { return alpha_normalize(formula(depth)); }
};

}  // namespace detail

inline SoundnessReport oracle_rule_soundness(Rule rule, Logic logic, int samples,
                                             int max_domain, std::uint64_t seed = 1) {
  if (!rules_for_logic(logic, rule == Rule::ex_I4).count(rule))
    throw std::invalid_argument(std::string("rule ") + rule_name(rule) +
                                " not in calculus for " + logic_name(logic));
  SoundnessReport rep;
  rep.rule = rule;
  rep.logic = logic;
  detail::RuleSampler s(seed);
  const bool lminus = logic == Logic::NQFLminus;

  auto no_E = [&](const FormulaPtr& f) {  // L- has no existence predicate
    struct V {
      static bool has_E(const FormulaPtr& f) {
        switch (f->kind) {
          case FormulaKind::ExistsPred: return true;
          case FormulaKind::Atom:
            for (auto& a : f->args)
              if (a->kind == TermKind::Descr && has_E_body(a)) return true;
            return false;
          case FormulaKind::Eq:
            return has_E_body(f->lhs) || has_E_body(f->rhs);
          case FormulaKind::Not: return has_E(f->sub);
          case FormulaKind::And: return has_E(f->sub) || has_E(f->sub2);
          case FormulaKind::Forall: return has_E(f->sub);
          default: return false;
        }
      }
      static bool has_E_body(const TermPtr& t) {
        return t->kind == TermKind::Descr && has_E(t->body);
      }
    };
    return !V::has_E(f);
  };
  auto sample_formula = [&]() {
    for (;;) {
      FormulaPtr f = s.closed_formula();
      if (!lminus || no_E(f)) return f;
    }
  };
  auto sample_atomish = [&]() {
    for (;;) {
      FormulaPtr f = alpha_normalize(s.atom());
      if (!lminus || no_E(f)) return f;
    }
  };

  for (int i = 0; i < samples; ++i) {
    std::vector<FormulaPtr> premises;
    std::vector<std::vector<FormulaPtr>> conclusions;
    bool premise_must_be_unsat = false;
    FreshGen fg;
    fg.n = 100;  // fresh parameters _k101, ... never collide with a, b

    auto subst = [](const TermPtr& d, const std::string& p) {
      return alpha_normalize(substitute(d->body, d->name, mk_param(p)));
    };

    switch (rule) {
      case Rule::neg_neg_E: {
        FormulaPtr f = sample_formula();
        premises = {alpha_normalize(mk_not(mk_not(f)))};
        conclusions = {{f}};
        break;
      }
      case Rule::and_E: {
        FormulaPtr f = sample_formula(), g = sample_formula();
        premises = {alpha_normalize(mk_and(f, g))};
        conclusions = {{f, g}};
        break;
      }
      case Rule::neg_and_E: {
        FormulaPtr f = sample_formula(), g = sample_formula();
        premises = {alpha_normalize(mk_not(mk_and(f, g)))};
        conclusions = {{alpha_normalize(mk_not(f))}, {alpha_normalize(mk_not(g))}};
        break;
      }
      case Rule::bot1: {
        FormulaPtr f = sample_formula();
        premises = {f, alpha_normalize(mk_not(f))};
        premise_must_be_unsat = true;
        break;
      }
      case Rule::bot2: {
        TermPtr t = s.pick(2) ? s.dd() : mk_param(s.param());
        premises = {alpha_normalize(mk_neq(t, t))};
        premise_must_be_unsat = true;
        break;
      }
      case Rule::bot3: {
        TermPtr t = mk_param(s.param());
        premises = {alpha_normalize(mk_neq(t, t))};
        premise_must_be_unsat = true;
        break;
      }
      case Rule::forall_E1:
      case Rule::forall_E2: {
        std::string x = "z";
        FormulaPtr body = s.pick(2) ? mk_atom(s.pred(), {mk_bound(x)})
                                    : mk_eq(mk_bound(x), mk_param(s.param()));
        if (lminus) body = mk_atom(s.pred(), {mk_bound(x)});
        FormulaPtr q = alpha_normalize(mk_forall(x, body));
        std::string b = s.param();
        premises = {q};
        if (rule == Rule::forall_E2)
          premises.push_back(mk_exists_pred(mk_param(b)));
        conclusions = {{alpha_normalize(substitute(q->sub, q->name, mk_param(b)))}};
        break;
      }
      case Rule::neg_forall_E1:
      case Rule::neg_forall_E2: {
        std::string x = "z";
        FormulaPtr body = mk_atom(s.pred(), {mk_bound(x)});
        FormulaPtr q = alpha_normalize(mk_forall(x, body));
        premises = {alpha_normalize(mk_not(q))};
        std::string a = fg.next();
        FormulaPtr inst = alpha_normalize(mk_not(substitute(q->sub, q->name, mk_param(a))));
        if (rule == Rule::neg_forall_E1) conclusions = {{inst}};
        else conclusions = {{FormulaPtr(mk_exists_pred(mk_param(a))), inst}};
        break;
      }
      case Rule::eq_E: {
        TermPtr t1 = s.term(), t2 = s.term();
        FormulaPtr psi = sample_atomish();
        premises = {alpha_normalize(mk_eq(t1, t2)), psi};
        std::string k1 = key_of(t1);
        FormulaPtr res = count_occurrences(psi, k1) > 0
                             ? alpha_normalize(replace_occurrence(psi, k1, t2, 0))
                             : psi;
        conclusions = {{res}};
        break;
      }
      case Rule::eq_I1:
      case Rule::ex_I1: {
        TermPtr t = rule == Rule::eq_I1 || s.pick(2) ? TermPtr(s.dd())
                                                     : TermPtr(mk_param(s.param()));
        premises = {alpha_normalize(mk_atom(s.pred(), {t}))};
        if (rule == Rule::eq_I1)
          conclusions = {{alpha_normalize(mk_eq(mk_param(fg.next()), t))}};
        else
          conclusions = {{alpha_normalize(mk_exists_pred(t))}};
        break;
      }
      case Rule::eq_I2:
      case Rule::ex_I2: {
        TermPtr t1 = s.dd();
        TermPtr t2 = s.pick(2) ? TermPtr(s.dd()) : TermPtr(mk_param(s.param()));
        premises = {alpha_normalize(mk_eq(t2, t1))};
        if (rule == Rule::eq_I2)
          conclusions = {{alpha_normalize(mk_eq(mk_param(fg.next()), t1))}};
        else
          conclusions = {{alpha_normalize(mk_exists_pred(t1))}};
        break;
      }
      case Rule::cut1:
      case Rule::cut2: {
        std::string b = s.param();
        TermPtr t = s.dd();
        premises = {sample_atomish()};
        if (rule == Rule::cut2) premises.push_back(mk_exists_pred(mk_param(b)));
        conclusions = {{alpha_normalize(mk_eq(mk_param(b), t))},
                       {alpha_normalize(mk_neq(mk_param(b), t))}};
        break;
      }
      case Rule::ex_E1: {
        TermPtr t = s.dd();
        premises = {alpha_normalize(mk_exists_pred(t))};
        conclusions = {{alpha_normalize(mk_eq(mk_param(fg.next()), t))}};
        break;
      }
      case Rule::ex_E2: {
        TermPtr t = s.term();
        premises = {alpha_normalize(mk_exists_pred(t))};
        conclusions = {{alpha_normalize(mk_eq(t, t))}};
        break;
      }
      case Rule::ex_I3: {
        std::string b = s.param();
        premises = {alpha_normalize(mk_atom(s.pred(), {mk_param(b)}))};
        conclusions = {{alpha_normalize(mk_exists_pred(mk_param(b)))}};
        break;
      }
      case Rule::ex_I4: {
        premises = {alpha_normalize(mk_forall("z", mk_atom(s.pred(), {mk_bound("z")})))};
        conclusions = {{alpha_normalize(mk_exists_pred(mk_param(fg.next())))}};
        break;
      }
      case Rule::iota_E1:
      case Rule::iota_E2: {
        std::string b1 = s.param(), b2 = s.param();
        TermPtr d = s.dd();
        premises = {alpha_normalize(mk_eq(mk_param(b1), d))};
        if (rule == Rule::iota_E2) {
          premises.push_back(mk_exists_pred(mk_param(b1)));
          premises.push_back(mk_exists_pred(mk_param(b2)));
        }
        conclusions = {
            {subst(d, b1), alpha_normalize(mk_not(substitute(d->body, d->name, mk_param(b2))))},
            {alpha_normalize(mk_eq(mk_param(b1), mk_param(b2))), subst(d, b1)}};
        break;
      }
      case Rule::neg_iota_E1:
      case Rule::neg_iota_E2: {
        std::string b = s.param();
        TermPtr d = s.dd();
        premises = {alpha_normalize(mk_neq(mk_param(b), d))};
        if (rule == Rule::neg_iota_E2) premises.push_back(mk_exists_pred(mk_param(b)));
        std::string a = fg.next();
        std::vector<FormulaPtr> right = {alpha_normalize(mk_neq(mk_param(a), mk_param(b))),
                                         subst(d, a)};
        if (rule == Rule::neg_iota_E2) right.push_back(mk_exists_pred(mk_param(a)));
        conclusions = {{alpha_normalize(mk_not(substitute(d->body, d->name, mk_param(b))))},
                       std::move(right)};
        break;
      }
    }

    ++rep.samples;
    bool nonempty_de = rule == Rule::ex_I4;
    auto sat = [&](const std::vector<FormulaPtr>& fs) {
      EnumerationSpace sp = space_for(fs, logic, max_domain);
      if (nonempty_de) sp.require_nonempty_de = true;
      return enumerate_models(sp, [&](const Model& m, const Env& v) {
        for (auto& f : fs)
          if (!eval_closed(m, v, f, logic)) return false;
        return true;
      });
    };

    if (!sat(premises)) {
      if (premise_must_be_unsat) ++rep.satisfiable_premises;  // counts checked samples
      continue;
    }
    if (premise_must_be_unsat) {
      std::string ce = "premises unexpectedly satisfiable:";
      for (auto& p : premises) ce += " " + print(p);
      rep.counterexamples.push_back(ce);
      continue;
    }
    ++rep.satisfiable_premises;

    bool some_ok = false;
    for (auto& set : conclusions) {
      std::vector<FormulaPtr> joint = premises;
      joint.insert(joint.end(), set.begin(), set.end());
      if (sat(joint)) { some_ok = true; break; }
    }
    if (!some_ok) {
      std::string ce = "no conclusion co-satisfiable with:";
      for (auto& p : premises) ce += " " + print(p);
      rep.counterexamples.push_back(ce);
    }
  }
  return rep;
}

}  // namespace freedesc
