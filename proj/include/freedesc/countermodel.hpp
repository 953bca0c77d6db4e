#pragma once

// Extraction of a finite model from an open saturated branch, following the
// Satisfaction Lemma construction: elements are ~-equivalence classes of the
// closed terms on the branch plus one extra object o, and improper
// descriptions denote their own class through the outer map. verify_model
// re-checks every branch formula against the extracted model.

#include <map>
#include <set>
#include <string>
#include <vector>

#include "freedesc/calculus.hpp"
#include "freedesc/logic.hpp"
#include "freedesc/semantics.hpp"
#include "freedesc/syntax.hpp"

namespace freedesc {

struct ExtractedModel {
  Model model;
  std::map<std::string, Elem> term_elem;   // closed branch term key -> element
  std::map<Elem, std::string> class_reps;  // element -> representative term key
  Env v;                                   // parameter assignment
  Elem extra = 0;                          // the object o
};

namespace detail {

struct UnionFind {
  std::map<std::string, std::string> parent;
  void ensure(const std::string& x) { parent.emplace(x, x); }
  std::string find(const std::string& x) {
    ensure(x);
    std::string r = x;
    while (parent[r] != r) r = parent[r];
    std::string c = x;
    while (parent[c] != r) {
      std::string next = parent[c];
      parent[c] = r;
      c = next;
    }
    return r;
  }
  void unite(const std::string& a, const std::string& b) {
    std::string ra = find(a), rb = find(b);
    if (ra != rb) parent[ra] = rb;
  }
};

// parameters sort before descriptions, then lexicographic
inline bool term_key_less(const std::string& a, const std::string& b) {
  bool da = a.rfind("the ", 0) == 0, db = b.rfind("the ", 0) == 0;
  if (da != db) return db;
  return a < b;
}

}  // namespace detail

inline ExtractedModel extract_model(const BranchView& B, Logic logic) {
  std::vector<std::string> params = params_of(B.formulas);
  std::vector<TermPtr> closed_dds;
  for (auto& d : dd_subterms(B.formulas))
    if (term_closed(d)) closed_dds.push_back(d);

  // TERM(B) and the ~ relation
  detail::UnionFind uf;
  std::vector<std::string> term_keys;
  std::map<std::string, TermPtr> term_of;
  for (auto& p : params) {
    term_keys.push_back(p);
    term_of[p] = mk_param(p);
    uf.ensure(p);
  }
  for (auto& d : closed_dds) {
    std::string k = print(d);
    term_keys.push_back(k);
    term_of[k] = d;
    uf.ensure(k);
  }
  std::set<std::string> identity_pairs;  // "lhs|rhs" of identities on B
  for (auto& f : B.formulas)
    if (f->kind == FormulaKind::Eq) {
      std::string l = key_of(f->lhs), r = key_of(f->rhs);
      uf.unite(l, r);
      identity_pairs.insert(l + "|" + r);
    }

  // classes, ordered by representative (parameters first, lexicographic)
  std::map<std::string, std::vector<std::string>> classes;  // rep -> members
  for (auto& k : term_keys) {
    std::string root = uf.find(k);
    auto& members = classes[root];
    members.push_back(k);
  }
  std::vector<std::string> reps;  // canonical representative per class
  std::map<std::string, std::string> root_rep;
  for (auto& [root, members] : classes) {
    std::string rep = members[0];
    for (auto& m : members)
      if (detail::term_key_less(m, rep)) rep = m;
    root_rep[root] = rep;
    reps.push_back(rep);
  }
  std::sort(reps.begin(), reps.end(), detail::term_key_less);

  ExtractedModel E;
  std::map<std::string, Elem> rep_elem;
  for (size_t i = 0; i < reps.size(); ++i) rep_elem[reps[i]] = static_cast<Elem>(i);
  E.extra = static_cast<Elem>(reps.size());
  for (auto& k : term_keys) E.term_elem[k] = rep_elem[root_rep[uf.find(k)]];
  for (auto& [rep, e] : rep_elem) E.class_reps[e] = rep;
  E.class_reps[E.extra] = "";

  Model& m = E.model;
  for (Elem e = 0; e <= E.extra; ++e) m.D.push_back(e);

  // DE per logic
  auto exists_atoms = [&](auto&& take) {
    for (auto& f : B.formulas)
      if (f->kind == FormulaKind::ExistsPred) take(key_of(f->lhs));
  };
  if (logic == Logic::NQFLminus) {
    for (auto& p : params) m.DE.insert(E.term_elem[p]);
  } else {
    exists_atoms([&](const std::string& k) {
      auto it = E.term_elem.find(k);
      if (it != E.term_elem.end()) m.DE.insert(it->second);
    });
  }
  if (is_quasi(logic) && m.DE.empty()) m.DE.insert(E.extra);

  // I(P) from atoms on B
  for (auto& f : B.formulas)
    if (f->kind == FormulaKind::Atom) {
      std::vector<Elem> tup;
      bool ok = true;
      for (auto& a : f->args) {
        auto it = E.term_elem.find(key_of(a));
        if (it == E.term_elem.end()) { ok = false; break; }
        tup.push_back(it->second);
      }
      if (ok) m.I[f->name].insert(std::move(tup));
      else m.I.emplace(f->name, std::set<std::vector<Elem>>{});
    }

  for (auto& p : params) E.v[p] = E.term_elem[p];

  // outer entries. Closed descriptions whose class is outside DE denote their
  // own class; open descriptions get an entry per environment, denoting the
  // class of the instantiated term when it occurs on B, otherwise o.
  std::set<DescrKey> have;
  auto add_entry = [&](const DescrKey& key, Elem val) {
    if (!have.insert(key).second) return;
    OuterEntry oe;
    oe.descr = key.descr;
    oe.env = key.env;
    oe.val = val;
    m.outer.push_back(std::move(oe));
  };
  auto pick_outer_elem = [&](Elem preferred) -> std::optional<Elem> {
    if (!m.DE.count(preferred)) return preferred;
    for (Elem e : m.D)
      if (!m.DE.count(e)) return e;
    return std::nullopt;
  };
  // properness of a description under an environment: exactly one witness
  // in DE, as in interpret_term
  auto proper_witness = [&](const TermPtr& dd, Env env) -> std::optional<Elem> {
    std::vector<Elem> sat;
    for (Elem o : m.DE) {
      env[dd->name] = o;
      if (eval_formula(m, env, dd->body, logic)) sat.push_back(o);
    }
    if (sat.size() == 1) return sat[0];
    return std::nullopt;
  };

  std::vector<Elem> codomain = is_quasi(logic)
      ? std::vector<Elem>(m.DE.begin(), m.DE.end()) : m.D;

  // two passes: closed DDs first (their entries may be consulted while
  // checking properness of open ones), then open DDs
  for (auto& d : closed_dds) {
    Elem cls = E.term_elem[print(d)];
    if (m.DE.count(cls)) continue;  // witnessed: expected proper, no entry
    add_entry(descr_key(d, {}), cls);
  }
  for (auto& d : dd_subterms(B.formulas)) {
    if (term_closed(d)) continue;
    std::set<std::string> scope;
    std::vector<std::string> fv;
    detail::free_var_order_t(d, scope, fv);
    Env env = E.v;  // parameters inside the body are interpreted through v
    detail::for_each_env(fv, codomain, env, 0, [&](Env& e) {
      DescrKey key = descr_key(d, e);
      if (have.count(key)) return;
      if (proper_witness(d, e)) return;  // proper: outer never consulted
      // instantiate free variables by class representatives, if any
      TermPtr inst = d;
      bool representable = true;
      for (auto& x : fv) {
        Elem val = e[x];
        auto it = E.class_reps.find(val);
        if (it == E.class_reps.end() || it->second.empty()) {
          representable = false;
          break;
        }
        inst = substitute(inst, x, term_of[it->second]);
      }
      Elem raw = E.extra;
      if (representable) {
        auto it = E.term_elem.find(key_of(inst));
        if (it != E.term_elem.end()) raw = it->second;
      }
      if (auto val = pick_outer_elem(raw)) add_entry(key, *val);
    });
  }
  return E;
}

// Re-checks the extracted model: structural well-formedness, condition (*)
// for every branch formula, the Claim relating description denotations to
// identities on the branch, and the parameter coverage of DE.
inline std::vector<std::string> verify_model(const ExtractedModel& E, const BranchView& B,
                                             Logic logic) {
  std::vector<std::string> out = check_model_wellformed(E.model, logic, B.formulas, E.v);
  if (!out.empty()) return out;

  for (size_t i = 0; i < B.formulas.size(); ++i) {
    try {
      if (!eval_closed(E.model, E.v, B.formulas[i], logic)) {
        out.push_back("branch formula not satisfied: " + B.keys[i]);
        return out;
      }
    } catch (const EvalError& err) {
      out.push_back(std::string("evaluation error on ") + B.keys[i] + ": " + err.what());
      return out;
    }
  }

  // Claim: den(the x. phi) = [a] iff the identity occurs on B (equivalently,
  // on a saturated branch, iff the description and the parameter share a class)
  std::vector<std::string> params = params_of(B.formulas);
  for (auto& d : dd_subterms(B.formulas)) {
    if (!term_closed(d)) continue;
    Elem den;
    try {
      Env env = E.v;
      den = interpret_term(E.model, env, d, logic);
    } catch (const EvalError& err) {
      out.push_back(std::string("claim check: ") + err.what());
      return out;
    }
    auto it = E.term_elem.find(print(d));
    if (it == E.term_elem.end()) continue;
    for (auto& a : params) {
      bool same_class = it->second == E.term_elem.at(a);
      bool denotes_a = den == E.v.at(a);
      if (same_class != denotes_a) {
        out.push_back("claim violated for " + print(d) + " and parameter " + a);
        return out;
      }
    }
  }

  // every DE element is the class of some parameter (except the extra object
  // when DE would otherwise be empty)
  for (Elem e : E.model.DE) {
    if (e == E.extra) continue;
    bool covered = false;
    for (auto& p : params)
      if (E.term_elem.at(p) == e) { covered = true; break; }
    if (!covered)
      out.push_back("DE element " + std::to_string(e) + " has no parameter in its class");
  }
  return out;
}

}  // namespace freedesc
