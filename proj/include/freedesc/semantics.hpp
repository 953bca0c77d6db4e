#pragma once

// Finite dual-domain structures <D, DE, I> and the satisfaction relation,
// parameterized by logic (positive vs negative atoms, assignment co-domain).
// An explicit `outer` map makes description denotation total: improper
// descriptions denote outer-domain objects.

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "freedesc/logic.hpp"
#include "freedesc/syntax.hpp"

namespace freedesc {

using Elem = int;
using Env = std::map<std::string, Elem>;  // parameters and in-scope bound variables

struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OuterEntry {
  std::string descr;           // canonical description string (placeholder free vars)
  std::vector<std::pair<std::string, Elem>> env;  // placeholder -> value, in order
  Elem val;
};

struct Model {
  std::vector<Elem> D;      // sorted, distinct
  std::set<Elem> DE;        // subset of D
  std::map<std::string, std::set<std::vector<Elem>>> I;
  std::vector<OuterEntry> outer;

  bool in_domain(Elem e) const {
    return std::binary_search(D.begin(), D.end(), e);
  }
  bool exists(Elem e) const { return DE.count(e) != 0; }

  const Elem* outer_lookup(const std::string& descr,
                           const std::vector<std::pair<std::string, Elem>>& env) const {
    for (const auto& ent : outer)
      if (ent.descr == descr && ent.env == env) return &ent.val;
    return nullptr;
  }
};

// ---------------------------------------------------------------------------
// canonical key for an open or closed description relative to an environment:
// free variables are replaced by placeholder parameters _f0, _f1, ... in
// first-occurrence order and their values recorded alongside.

struct DescrKey {
  std::string descr;
  std::vector<std::pair<std::string, Elem>> env;
  bool operator<(const DescrKey& o) const {
    return std::tie(descr, env) < std::tie(o.descr, o.env);
  }
  bool operator==(const DescrKey& o) const { return descr == o.descr && env == o.env; }
};

namespace detail {

// first-occurrence order of the free variables of a term
inline void free_var_order_t(const TermPtr& t, std::set<std::string>& scope,
                             std::vector<std::string>& out);

inline void free_var_order_f(const FormulaPtr& f, std::set<std::string>& scope,
                             std::vector<std::string>& out) {
  switch (f->kind) {
    case FormulaKind::Atom:
      for (auto& a : f->args) free_var_order_t(a, scope, out);
      break;
    case FormulaKind::Eq:
      free_var_order_t(f->lhs, scope, out);
      free_var_order_t(f->rhs, scope, out);
      break;
    case FormulaKind::ExistsPred:
      free_var_order_t(f->lhs, scope, out);
      break;
    case FormulaKind::Not:
      free_var_order_f(f->sub, scope, out);
      break;
    case FormulaKind::And:
      free_var_order_f(f->sub, scope, out);
      free_var_order_f(f->sub2, scope, out);
      break;
    case FormulaKind::Forall: {
      bool added = scope.insert(f->name).second;
      free_var_order_f(f->sub, scope, out);
      if (added) scope.erase(f->name);
      break;
    }
    default:
      throw std::invalid_argument("free_var_order: formula must be desugared");
  }
}

inline void free_var_order_t(const TermPtr& t, std::set<std::string>& scope,
                             std::vector<std::string>& out) {
  switch (t->kind) {
    case TermKind::BoundVar:
      if (!scope.count(t->name) &&
          std::find(out.begin(), out.end(), t->name) == out.end())
        out.push_back(t->name);
      break;
    case TermKind::Param:
      break;
    case TermKind::Descr: {
      bool added = scope.insert(t->name).second;
      free_var_order_f(t->body, scope, out);
      if (added) scope.erase(t->name);
      break;
    }
  }
}

}  // namespace detail

// Canonical lookup key for a description term under an environment giving
// values to its free variables.
inline DescrKey descr_key(const TermPtr& descr, const Env& env) {
  std::set<std::string> scope;
  std::vector<std::string> fv;
  detail::free_var_order_t(descr, scope, fv);
  TermPtr renamed = descr;
  DescrKey key;
  for (size_t i = 0; i < fv.size(); ++i) {
    std::string ph = "_f" + std::to_string(i);
    // placeholders are parameters, so no capture is possible
    renamed = substitute(renamed, fv[i], mk_param(ph));
    auto it = env.find(fv[i]);
    if (it == env.end())
      throw EvalError("unbound variable '" + fv[i] + "' in description");
    key.env.emplace_back(ph, it->second);
  }
  key.descr = print(alpha_normalize(renamed));
  return key;
}

// ---------------------------------------------------------------------------
// interpretation and satisfaction

inline bool eval_formula(const Model& m, Env& env, const FormulaPtr& f, Logic logic);

inline Elem interpret_term(const Model& m, Env& env, const TermPtr& t, Logic logic) {
  switch (t->kind) {
    case TermKind::BoundVar:
    case TermKind::Param: {
      auto it = env.find(t->name);
      if (it == env.end()) throw EvalError("no value for '" + t->name + "'");
      return it->second;
    }
    case TermKind::Descr: {
      // proper iff exactly one existing witness: the uniqueness check ranges
      // over DE in every logic, matching the branch-model construction where
      // only E!-parameters are compared against the description
      const std::string& x = t->name;
      auto saved = env.find(x) == env.end() ? std::optional<Elem>{}
                                            : std::optional<Elem>{env[x]};
      std::vector<Elem> sat;
      for (Elem o : m.DE) {
        env[x] = o;
        if (eval_formula(m, env, t->body, logic)) sat.push_back(o);
      }
      if (saved) env[x] = *saved; else env.erase(x);
      if (sat.size() == 1) return sat[0];
      DescrKey key = descr_key(t, env);
      if (const Elem* v = m.outer_lookup(key.descr, key.env)) return *v;
      throw EvalError("no outer entry for improper description " + key.descr);
    }
  }
  throw std::logic_error("interpret_term: bad kind");
}

inline bool eval_formula(const Model& m, Env& env, const FormulaPtr& f, Logic logic) {
  switch (f->kind) {
    case FormulaKind::Atom: {
      std::vector<Elem> tup;
      tup.reserve(f->args.size());
      for (auto& a : f->args) tup.push_back(interpret_term(m, env, a, logic));
      if (is_negative(logic))
        for (Elem e : tup)
          if (!m.exists(e)) return false;
      auto it = m.I.find(f->name);
      return it != m.I.end() && it->second.count(tup) != 0;
    }
    case FormulaKind::Eq: {
      Elem l = interpret_term(m, env, f->lhs, logic);
      Elem r = interpret_term(m, env, f->rhs, logic);
      if (is_negative(logic) && (!m.exists(l) || !m.exists(r))) return false;
      return l == r;
    }
    case FormulaKind::ExistsPred:
      return m.exists(interpret_term(m, env, f->lhs, logic));
    case FormulaKind::Not:
      return !eval_formula(m, env, f->sub, logic);
    case FormulaKind::And:
      return eval_formula(m, env, f->sub, logic) && eval_formula(m, env, f->sub2, logic);
    case FormulaKind::Forall: {
      auto saved = env.find(f->name) == env.end() ? std::optional<Elem>{}
                                                  : std::optional<Elem>{env[f->name]};
      bool ok = true;
      for (Elem o : m.DE) {
        env[f->name] = o;
        if (!eval_formula(m, env, f->sub, logic)) { ok = false; break; }
      }
      if (saved) env[f->name] = *saved; else env.erase(f->name);
      return ok;
    }
    default:
      throw std::invalid_argument("eval_formula: formula must be desugared");
  }
}

inline bool eval_closed(const Model& m, const Env& assignment, const FormulaPtr& f, Logic logic) {
  Env env = assignment;
  return eval_formula(m, env, f, logic);
}

// ---------------------------------------------------------------------------
// well-formedness diagnostics

// Enumerates environments for the given variables over a co-domain.
namespace detail {

template <typename Fn>
void for_each_env(const std::vector<std::string>& vars, const std::vector<Elem>& codomain,
                  Env& env, size_t i, Fn&& fn) {
  if (i == vars.size()) { fn(env); return; }
  for (Elem o : codomain) {
    env[vars[i]] = o;
    for_each_env(vars, codomain, env, i + 1, fn);
  }
  env.erase(vars[i]);
}

}  // namespace detail

// Validates structural invariants, plus outer/uniqueness consistency for every
// description occurring in `formulas` (checked under all environments of its
// free variables over the assignment co-domain). Parameters occurring inside
// description bodies are interpreted through `v`.
inline std::vector<std::string> check_model_wellformed(
    const Model& m, Logic logic, const std::vector<FormulaPtr>& formulas = {},
    const Env& v = {}) {
  std::vector<std::string> out;
  for (size_t i = 1; i < m.D.size(); ++i)
    if (m.D[i - 1] >= m.D[i]) { out.push_back("D is not sorted/distinct"); break; }
  for (Elem e : m.DE)
    if (!m.in_domain(e)) out.push_back("DE element " + std::to_string(e) + " not in D");
  for (auto& [pred, tuples] : m.I) {
    std::optional<size_t> arity;
    for (auto& tup : tuples) {
      if (arity && *arity != tup.size()) {
        out.push_back("inconsistent arity in I(" + pred + ")");
        break;
      }
      arity = tup.size();
      for (Elem e : tup)
        if (!m.in_domain(e))
          out.push_back("I(" + pred + ") tuple element " + std::to_string(e) + " not in D");
    }
  }
  for (auto& ent : m.outer) {
    if (!m.in_domain(ent.val))
      out.push_back("outer value " + std::to_string(ent.val) + " not in D");
    for (auto& [ph, e] : ent.env)
      if (!m.in_domain(e))
        out.push_back("outer env value " + std::to_string(e) + " not in D");
  }
  if (!out.empty()) return out;

  std::vector<Elem> codomain;
  if (is_quasi(logic)) codomain.assign(m.DE.begin(), m.DE.end());
  else codomain = m.D;

  for (const TermPtr& dd : dd_subterms(formulas)) {
    std::set<std::string> scope;
    std::vector<std::string> fv;
    detail::free_var_order_t(dd, scope, fv);
    Env env = v;
    detail::for_each_env(fv, codomain, env, 0, [&](Env& e) {
      const std::string& x = dd->name;
      std::vector<Elem> sat;
      auto saved = e.find(x) == e.end() ? std::optional<Elem>{} : std::optional<Elem>{e[x]};
      try {
        for (Elem o : m.DE) {
          e[x] = o;
          if (eval_formula(m, e, dd->body, logic)) sat.push_back(o);
        }
      } catch (const EvalError& err) {
        out.push_back(std::string("cannot check description: ") + err.what());
        if (saved) e[x] = *saved; else e.erase(x);
        return;
      }
      if (saved) e[x] = *saved; else e.erase(x);
      DescrKey key = descr_key(dd, e);
      const Elem* ov = m.outer_lookup(key.descr, key.env);
      bool proper = sat.size() == 1;
      if (proper) {
        if (ov && *ov != sat[0])
          out.push_back("outer disagrees with unique witness for " + key.descr);
      } else {
        if (!ov)
          out.push_back("missing outer entry for improper description " + key.descr);
        else if (m.exists(*ov))
          out.push_back("outer maps improper description " + key.descr + " into DE");
      }
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON serialization

inline nlohmann::json model_to_json(const Model& m) {
  nlohmann::json j;
  j["D"] = m.D;
  j["DE"] = std::vector<Elem>(m.DE.begin(), m.DE.end());
  nlohmann::json interp = nlohmann::json::object();
  for (auto& [pred, tuples] : m.I) {
    nlohmann::json ts = nlohmann::json::array();
    for (auto& tup : tuples) ts.push_back(tup);
    interp[pred] = std::move(ts);
  }
  j["I"] = std::move(interp);
  nlohmann::json outer = nlohmann::json::array();
  for (auto& ent : m.outer) {
    nlohmann::json env = nlohmann::json::object();
    for (auto& [ph, e] : ent.env) env[ph] = e;
    outer.push_back({{"descr", ent.descr}, {"env", std::move(env)}, {"val", ent.val}});
  }
  j["outer"] = std::move(outer);
  return j;
}

inline Model model_from_json(const nlohmann::json& j) {
  Model m;
  m.D = j.at("D").get<std::vector<Elem>>();
  std::sort(m.D.begin(), m.D.end());
  auto de = j.at("DE").get<std::vector<Elem>>();
  m.DE.insert(de.begin(), de.end());
  if (j.contains("I"))
    for (auto& [pred, tuples] : j.at("I").items())
      for (auto& tup : tuples) m.I[pred].insert(tup.get<std::vector<Elem>>());
  if (j.contains("outer"))
    for (auto& ent : j.at("outer")) {
      OuterEntry oe;
      oe.descr = ent.at("descr").get<std::string>();
      if (ent.contains("env"))
        for (auto& [ph, e] : ent.at("env").items()) oe.env.emplace_back(ph, e.get<Elem>());
      std::sort(oe.env.begin(), oe.env.end());  // placeholder order _f0 < _f1 < ...
      oe.val = ent.at("val").get<Elem>();
      m.outer.push_back(std::move(oe));
    }
  return m;
}

}  // namespace freedesc
