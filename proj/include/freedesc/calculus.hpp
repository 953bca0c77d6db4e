#pragma once

// Declarative rule schemas and the per-logic rule tables; generation and
// application of rule instances against a branch snapshot.
//
// An instance is skipped at generation time when one of its conclusion sets
// is already contained in the branch (for fresh-parameter rules: when some
// existing parameter can play the fresh role). This keeps saturation exactly
// strong enough for countermodel extraction while avoiding both useless
// splits and the fresh-parameter regress through (EE1)/(=I).

#include <map>
#include <unordered_map>
#include <unordered_set>
#include <set>
#include <string>
#include <vector>

#include "freedesc/logic.hpp"
#include "freedesc/syntax.hpp"

namespace freedesc {

enum class Rule {
  neg_neg_E, and_E, neg_and_E, bot1, bot2, bot3,
  forall_E1, neg_forall_E1, forall_E2, neg_forall_E2,
  eq_E, eq_I1, eq_I2, cut1, cut2,
  ex_E1, ex_E2, ex_I1, ex_I2, ex_I3, ex_I4,
  iota_E1, neg_iota_E1, iota_E2, neg_iota_E2
};

inline const char* rule_name(Rule r) {
  switch (r) {
    case Rule::neg_neg_E: return "neg_neg_E";
    case Rule::and_E: return "and_E";
    case Rule::neg_and_E: return "neg_and_E";
    case Rule::bot1: return "bot1";
    case Rule::bot2: return "bot2";
    case Rule::bot3: return "bot3";
    case Rule::forall_E1: return "forall_E1";
    case Rule::neg_forall_E1: return "neg_forall_E1";
    case Rule::forall_E2: return "forall_E2";
    case Rule::neg_forall_E2: return "neg_forall_E2";
    case Rule::eq_E: return "eq_E";
    case Rule::eq_I1: return "eq_I1";
    case Rule::eq_I2: return "eq_I2";
    case Rule::cut1: return "cut1";
    case Rule::cut2: return "cut2";
    case Rule::ex_E1: return "ex_E1";
    case Rule::ex_E2: return "ex_E2";
    case Rule::ex_I1: return "ex_I1";
    case Rule::ex_I2: return "ex_I2";
    case Rule::ex_I3: return "ex_I3";
    case Rule::ex_I4: return "ex_I4";
    case Rule::iota_E1: return "iota_E1";
    case Rule::neg_iota_E1: return "neg_iota_E1";
    case Rule::iota_E2: return "iota_E2";
    case Rule::neg_iota_E2: return "neg_iota_E2";
  }
  return "?";
}

inline std::set<Rule> rules_for_logic(Logic logic, bool nonempty = false) {
  if (nonempty && is_quasi(logic))
    throw std::invalid_argument("nonempty-domain flag only applies to PFL and NFL");
  std::set<Rule> rs = {Rule::neg_neg_E, Rule::and_E, Rule::neg_and_E, Rule::bot1, Rule::eq_E};
  switch (logic) {
    case Logic::PFL:
      rs.insert({Rule::bot2, Rule::forall_E2, Rule::neg_forall_E2, Rule::cut2,
                 Rule::ex_E1, Rule::iota_E2, Rule::neg_iota_E2});
      if (nonempty) rs.insert(Rule::ex_I4);
      break;
    case Logic::PQFL:
      rs.insert({Rule::bot2, Rule::forall_E1, Rule::neg_forall_E1, Rule::cut2,
                 Rule::ex_E1, Rule::ex_I3, Rule::iota_E1, Rule::neg_iota_E1});
      break;
    case Logic::NFL:
      rs.insert({Rule::ex_E2, Rule::forall_E2, Rule::neg_forall_E2, Rule::cut2,
                 Rule::ex_E1, Rule::ex_I1, Rule::ex_I2, Rule::iota_E2, Rule::neg_iota_E2});
      if (nonempty) rs.insert(Rule::ex_I4);
      break;
    case Logic::NQFL:
      rs.insert({Rule::bot3, Rule::forall_E1, Rule::neg_forall_E1, Rule::cut2,
                 Rule::ex_E1, Rule::ex_I1, Rule::ex_I2, Rule::ex_I3,
                 Rule::iota_E1, Rule::neg_iota_E1});
      break;
    case Logic::NQFLminus:
      rs.insert({Rule::bot3, Rule::forall_E1, Rule::neg_forall_E1, Rule::cut1,
                 Rule::eq_I1, Rule::eq_I2, Rule::iota_E1, Rule::neg_iota_E1});
      break;
  }
  return rs;
}

// ---------------------------------------------------------------------------
// branch snapshot

struct BranchView {
  std::vector<FormulaPtr> formulas;  // alpha-normal, closed, insertion order
  std::vector<std::string> keys;     // parallel to formulas
  std::unordered_set<std::string> key_set;

  bool has(const std::string& k) const { return key_set.count(k) != 0; }

  // returns false if already present
  bool add(const FormulaPtr& normal_formula) {
    std::string k = print(normal_formula);
    if (!key_set.insert(k).second) return false;
    formulas.push_back(normal_formula);
    keys.push_back(std::move(k));
    return true;
  }
};

struct FreshGen {
  int n = 0;
  std::string next() { return "_k" + std::to_string(++n); }
};

// ---------------------------------------------------------------------------
// rule instances

struct RuleInstance {
  Rule rule;
  std::vector<std::string> premises;  // keys of premise formulas
  std::string focus;                  // distinguishing auxiliary data
  bool needs_fresh = false;
  int priority = -1;  // scheduling override; -1 means rule_priority(rule)

  std::vector<std::vector<FormulaPtr>> concl;  // prebuilt when !needs_fresh

  // payload for fresh-parameter rules
  FormulaPtr body;     // quantifier or iota body
  std::string binder;  // its bound variable
  std::string bparam;  // b of (neg_iota_E*)
  TermPtr target;      // t of (ex_E1), t_i of (=I_*)

  bool closes() const { return rule == Rule::bot1 || rule == Rule::bot2 || rule == Rule::bot3; }

  std::string id() const {
    std::string s = rule_name(rule);
    for (auto& p : premises) { s += '|'; s += p; }
    s += '#';
    s += focus;
    return s;
  }
};

// ---------------------------------------------------------------------------
// single-occurrence term replacement (for (=E))

namespace detail {

struct OccReplacer {
  std::string tkey;
  TermPtr repl;     // null in counting mode
  int which = -1;   // occurrence to replace; -1 counts
  int count = 0;

  bool matches(const TermPtr& s) {
    return term_closed(s) && key_of(s) == tkey;
  }
  TermPtr go_t(const TermPtr& s) {
    if (matches(s)) {
      int i = count++;
      if (repl && i == which) return repl;
      return s;
    }
    if (s->kind == TermKind::Descr) {
      TermPtr b = s;
      FormulaPtr body = go_f(s->body);
      if (body != s->body) return mk_descr(s->name, body);
      return s;
    }
    return s;
  }
  FormulaPtr go_f(const FormulaPtr& f) {
    switch (f->kind) {
      case FormulaKind::Atom: {
        std::vector<TermPtr> args;
        args.reserve(f->args.size());
        for (auto& a : f->args) args.push_back(go_t(a));
        return mk_atom(f->name, std::move(args));
      }
      case FormulaKind::Eq:
        return mk_eq(go_t(f->lhs), go_t(f->rhs));
      case FormulaKind::ExistsPred:
        return mk_exists_pred(go_t(f->lhs));
      case FormulaKind::Not:
        return mk_not(go_f(f->sub));
      case FormulaKind::And:
        return mk_and(go_f(f->sub), go_f(f->sub2));
      case FormulaKind::Forall:
        return mk_forall(f->name, go_f(f->sub));
      default:
        throw std::invalid_argument("OccReplacer: formula must be desugared");
    }
  }
};

}  // namespace detail

inline int count_occurrences(const FormulaPtr& f, const std::string& term_key) {
  detail::OccReplacer r{term_key, nullptr, -1, 0};
  r.go_f(f);
  return r.count;
}

inline FormulaPtr replace_occurrence(const FormulaPtr& f, const std::string& term_key,
                                     const TermPtr& repl, int which) {
  detail::OccReplacer r{term_key, repl, which, 0};
  return r.go_f(f);
}

// ---------------------------------------------------------------------------
// instance generation

namespace detail {

// Memoized construction of normalized instantiations and rewrites. Instance
// generation re-enumerates the same candidates on every visit of a branch, so
// sharing the built nodes (and with them the print caches) dominates search
// cost on description-heavy problems.
inline FormulaPtr cached_subst(const FormulaPtr& body, const std::string& binder,
                               const std::string& param, bool negate) {
  thread_local std::unordered_map<std::string, FormulaPtr> memo;
  std::string k = print(body);
  k += '\x01';
  k += binder;
  k += '\x01';
  k += param;
  if (negate) k += '\x01';
  auto it = memo.find(k);
  if (it != memo.end()) return it->second;
  FormulaPtr r = substitute(body, binder, mk_param(param));
  if (negate) r = mk_not(r);
  r = alpha_normalize(r);
  memo.emplace(std::move(k), r);
  return r;
}

inline FormulaPtr cached_rewrite(const FormulaPtr& g, const std::string& src_key,
                                 const TermPtr& dst, int occ) {
  thread_local std::unordered_map<std::string, FormulaPtr> memo;
  std::string k = print(g);
  k += '\x01';
  k += src_key;
  k += '\x01';
  k += key_of(dst);
  k += '\x01';
  k += std::to_string(occ);
  auto it = memo.find(k);
  if (it != memo.end()) return it->second;
  FormulaPtr r = alpha_normalize(replace_occurrence(g, src_key, dst, occ));
  memo.emplace(std::move(k), r);
  return r;
}

inline int cached_count_occurrences(const FormulaPtr& f, const std::string& term_key) {
  thread_local std::unordered_map<std::string, int> memo;
  std::string k = print(f);
  k += '\x01';
  k += term_key;
  auto it = memo.find(k);
  if (it != memo.end()) return it->second;
  int n = count_occurrences(f, term_key);
  memo.emplace(std::move(k), n);
  return n;
}

inline FormulaPtr cached_eq(const std::string& b, const TermPtr& dd, bool negate) {
  thread_local std::unordered_map<std::string, FormulaPtr> memo;
  std::string k = b;
  k += '\x01';
  k += print(dd);
  if (negate) k += '\x01';
  auto it = memo.find(k);
  if (it != memo.end()) return it->second;
  FormulaPtr r = negate ? mk_neq(mk_param(b), dd) : mk_eq(mk_param(b), dd);
  r = alpha_normalize(r);
  memo.emplace(std::move(k), r);
  return r;
}

struct InstanceGen {
  const BranchView& B;
  Logic logic;
  const std::set<Rule>& rules;
  const std::unordered_set<std::string>* applied;  // ids already applied on this branch
  std::vector<RuleInstance> out;

  std::vector<std::string> params;
  std::vector<TermPtr> closed_dds;
  std::set<std::string> closed_dd_keys;

  InstanceGen(const BranchView& b, Logic l, const std::set<Rule>& rs,
              const std::unordered_set<std::string>* ap)
      : B(b), logic(l), rules(rs), applied(ap) {
    params = params_of(B.formulas);
    for (auto& d : dd_subterms(B.formulas))
      if (term_closed(d)) {
        closed_dds.push_back(d);
        closed_dd_keys.insert(print(d));
      }
  }

  bool on(Rule r) const { return rules.count(r) != 0; }

  // already applied on this branch? (cheap pre-check that avoids rebuilding
  // conclusions for instances the engine will filter out anyway)
  bool done(Rule r, std::initializer_list<std::string> prem,
            const std::string& focus) const {
    if (!applied) return false;
    std::string s = rule_name(r);
    for (auto& p : prem) { s += '|'; s += p; }
    s += '#';
    s += focus;
    return applied->count(s) != 0;
  }
  bool has_E(const std::string& p) const { return B.has("E!(" + p + ")"); }

  // does some parameter identity b = t / t = b exist for this closed DD?
  bool witnessed(const std::string& dd_key) const {
    for (auto& f : B.formulas) {
      if (f->kind != FormulaKind::Eq) continue;
      if (f->lhs->kind == TermKind::Param && f->rhs->kind == TermKind::Descr &&
          key_of(f->rhs) == dd_key)
        return true;
      if (f->rhs->kind == TermKind::Param && f->lhs->kind == TermKind::Descr &&
          key_of(f->lhs) == dd_key)
        return true;
    }
    return false;
  }

  bool set_present(const std::vector<FormulaPtr>& fs) const {
    for (auto& f : fs)
      if (!B.has(print(f))) return false;
    return true;
  }

  // emit a non-fresh instance unless some conclusion set is already on B
  void emit(Rule r, std::vector<std::string> prem, std::string focus,
            std::vector<std::vector<FormulaPtr>> concl, int priority = -1) {
    if (applied) {
      std::string s = rule_name(r);
      for (auto& p : prem) { s += '|'; s += p; }
      s += '#';
      s += focus;
      if (applied->count(s)) return;
    }
    bool closure = r == Rule::bot1 || r == Rule::bot2 || r == Rule::bot3;
    if (!closure)
      for (auto& set : concl)
        if (set_present(set)) return;
    RuleInstance inst;
    inst.rule = r;
    inst.premises = std::move(prem);
    inst.focus = std::move(focus);
    inst.concl = std::move(concl);
    inst.priority = priority;
    out.push_back(std::move(inst));
  }

  static FormulaPtr norm(const FormulaPtr& f) { return alpha_normalize(f); }

  void closure_rules() {
    for (size_t i = 0; i < B.formulas.size(); ++i) {
      const FormulaPtr& f = B.formulas[i];
      if (f->kind != FormulaKind::Not) continue;
      if (on(Rule::bot1)) {
        std::string inner = print(f->sub);
        if (B.has(inner)) emit(Rule::bot1, {inner, B.keys[i]}, "", {{}});
      }
      if (f->sub->kind == FormulaKind::Eq) {
        const FormulaPtr& eq = f->sub;
        bool same = key_of(eq->lhs) == key_of(eq->rhs);
        if (!same) continue;
        if (on(Rule::bot2)) emit(Rule::bot2, {B.keys[i]}, "", {{}});
        if (on(Rule::bot3) && eq->lhs->kind == TermKind::Param)
          emit(Rule::bot3, {B.keys[i]}, "", {{}});
      }
    }
  }

  void propositional() {
    for (size_t i = 0; i < B.formulas.size(); ++i) {
      const FormulaPtr& f = B.formulas[i];
      if (f->kind == FormulaKind::And && on(Rule::and_E))
        emit(Rule::and_E, {B.keys[i]}, "", {{norm(f->sub), norm(f->sub2)}});
      if (f->kind == FormulaKind::Not && f->sub->kind == FormulaKind::Not &&
          on(Rule::neg_neg_E))
        emit(Rule::neg_neg_E, {B.keys[i]}, "", {{norm(f->sub->sub)}});
      if (f->kind == FormulaKind::Not && f->sub->kind == FormulaKind::And &&
          on(Rule::neg_and_E))
        emit(Rule::neg_and_E, {B.keys[i]}, "",
             {{norm(mk_not(f->sub->sub))}, {norm(mk_not(f->sub->sub2))}});
    }
  }

  void quantifier_rules() {
    for (size_t i = 0; i < B.formulas.size(); ++i) {
      const FormulaPtr& f = B.formulas[i];
      if (f->kind == FormulaKind::Forall) {
        for (auto& b : params) {
          bool want1 = on(Rule::forall_E1) && !done(Rule::forall_E1, {B.keys[i]}, b);
          bool want2 = on(Rule::forall_E2) && has_E(b) &&
                       !done(Rule::forall_E2, {B.keys[i], "E!(" + b + ")"}, b);
          if (!want1 && !want2) continue;
          FormulaPtr inst = cached_subst(f->sub, f->name, b, false);
          if (want1) emit(Rule::forall_E1, {B.keys[i]}, b, {{inst}});
          if (want2) emit(Rule::forall_E2, {B.keys[i], "E!(" + b + ")"}, b, {{inst}});
        }
      }
      if (f->kind == FormulaKind::Not && f->sub->kind == FormulaKind::Forall) {
        const FormulaPtr& q = f->sub;
        if (on(Rule::neg_forall_E1) && !done(Rule::neg_forall_E1, {B.keys[i]}, "")) {
          // satisfied if some parameter already witnesses it
          bool have = false;
          for (auto& c : params)
            if (B.has(print(cached_subst(q->sub, q->name, c, true)))) {
              have = true;
              break;
            }
          if (!have) {
            RuleInstance inst;
            inst.rule = Rule::neg_forall_E1;
            inst.premises = {B.keys[i]};
            inst.needs_fresh = true;
            inst.body = q->sub;
            inst.binder = q->name;
            out.push_back(std::move(inst));
          }
        }
        if (on(Rule::neg_forall_E2) && !done(Rule::neg_forall_E2, {B.keys[i]}, "")) {
          bool have = false;
          for (auto& c : params)
            if (has_E(c) &&
                B.has(print(cached_subst(q->sub, q->name, c, true)))) {
              have = true;
              break;
            }
          if (!have) {
            RuleInstance inst;
            inst.rule = Rule::neg_forall_E2;
            inst.premises = {B.keys[i]};
            inst.needs_fresh = true;
            inst.body = q->sub;
            inst.binder = q->name;
            out.push_back(std::move(inst));
          }
        }
      }
    }
  }

  void existence_rules() {
    for (size_t i = 0; i < B.formulas.size(); ++i) {
      const FormulaPtr& f = B.formulas[i];
      if (f->kind == FormulaKind::ExistsPred) {
        if (on(Rule::ex_E1) && f->lhs->kind == TermKind::Descr &&
            !witnessed(key_of(f->lhs))) {
          RuleInstance inst;
          inst.rule = Rule::ex_E1;
          inst.premises = {B.keys[i]};
          inst.needs_fresh = true;
          inst.target = f->lhs;
          out.push_back(std::move(inst));
        }
        if (on(Rule::ex_E2))
          emit(Rule::ex_E2, {B.keys[i]}, "", {{norm(mk_eq(f->lhs, f->lhs))}});
      }
      // (E I1)/(E I2): per argument position. Applied at every position in
      // NFL as well: atoms are strict in negative semantics, so E t_i is
      // entailed for parameters too, and countermodel extraction needs it.
      if (f->kind == FormulaKind::Atom && on(Rule::ex_I1)) {
        for (size_t k = 0; k < f->args.size(); ++k)
          emit(Rule::ex_I1, {B.keys[i]}, "pos" + std::to_string(k),
               {{norm(mk_exists_pred(f->args[k]))}});
      }
      if (f->kind == FormulaKind::Eq && on(Rule::ex_I2)) {
        const TermPtr sides[2] = {f->lhs, f->rhs};
        for (int k = 0; k < 2; ++k)
          emit(Rule::ex_I2, {B.keys[i]}, "pos" + std::to_string(k),
               {{norm(mk_exists_pred(sides[k]))}});
      }
      // (=I1)/(=I2): fresh identity per DD argument position
      if (f->kind == FormulaKind::Atom && on(Rule::eq_I1)) {
        for (size_t k = 0; k < f->args.size(); ++k) {
          if (f->args[k]->kind != TermKind::Descr) continue;
          if (witnessed(key_of(f->args[k]))) continue;
          RuleInstance inst;
          inst.rule = Rule::eq_I1;
          inst.premises = {B.keys[i]};
          inst.focus = "pos" + std::to_string(k);
          inst.needs_fresh = true;
          inst.target = f->args[k];
          out.push_back(std::move(inst));
        }
      }
      if (f->kind == FormulaKind::Eq && on(Rule::eq_I2)) {
        const TermPtr sides[2] = {f->lhs, f->rhs};
        for (int k = 0; k < 2; ++k) {
          if (sides[k]->kind != TermKind::Descr) continue;
          if (witnessed(key_of(sides[k]))) continue;
          RuleInstance inst;
          inst.rule = Rule::eq_I2;
          inst.premises = {B.keys[i]};
          inst.focus = "pos" + std::to_string(k);
          inst.needs_fresh = true;
          inst.target = sides[k];
          out.push_back(std::move(inst));
        }
      }
    }
    if (on(Rule::ex_I3))
      for (auto& b : params)
        if (!has_E(b))
          emit(Rule::ex_I3, {}, b, {{norm(mk_exists_pred(mk_param(b)))}});
    if (on(Rule::ex_I4) && params.empty()) {
      RuleInstance inst;
      inst.rule = Rule::ex_I4;
      inst.needs_fresh = true;
      out.push_back(std::move(inst));
    }
  }

  // identities / negated identities between a parameter and a DD
  struct ParamDD {
    std::string b;
    TermPtr dd;
  };
  static std::optional<ParamDD> param_dd(const FormulaPtr& eq) {
    if (eq->lhs->kind == TermKind::Param && eq->rhs->kind == TermKind::Descr)
      return ParamDD{eq->lhs->name, eq->rhs};
    if (eq->rhs->kind == TermKind::Param && eq->lhs->kind == TermKind::Descr)
      return ParamDD{eq->rhs->name, eq->lhs};
    return std::nullopt;
  }

  void iota_rules() {
    for (size_t i = 0; i < B.formulas.size(); ++i) {
      const FormulaPtr& f = B.formulas[i];
      if (f->kind == FormulaKind::Eq) {
        auto pd = param_dd(f);
        if (!pd) continue;
        const std::string& b1 = pd->b;
        const TermPtr& dd = pd->dd;
        FormulaPtr fb1;
        for (auto& b2 : params) {
          bool want1 = on(Rule::iota_E1) && !done(Rule::iota_E1, {B.keys[i]}, b2);
          bool want2 =
              on(Rule::iota_E2) && has_E(b1) && has_E(b2) &&
              !done(Rule::iota_E2, {B.keys[i], "E!(" + b1 + ")", "E!(" + b2 + ")"}, b2);
          if (!want1 && !want2) continue;
          if (!fb1) fb1 = cached_subst(dd->body, dd->name, b1, false);
          FormulaPtr nfb2 = cached_subst(dd->body, dd->name, b2, true);
          FormulaPtr eq12 = norm(mk_eq(mk_param(b1), mk_param(b2)));
          if (want1) emit(Rule::iota_E1, {B.keys[i]}, b2, {{fb1, nfb2}, {eq12, fb1}});
          if (want2)
            emit(Rule::iota_E2, {B.keys[i], "E!(" + b1 + ")", "E!(" + b2 + ")"}, b2,
                 {{fb1, nfb2}, {eq12, fb1}});
        }
      }
      if (f->kind == FormulaKind::Not && f->sub->kind == FormulaKind::Eq) {
        auto pd = param_dd(f->sub);
        if (!pd) continue;
        const std::string& b = pd->b;
        const TermPtr& dd = pd->dd;
        FormulaPtr left = cached_subst(dd->body, dd->name, b, true);
        auto satisfied_fresh = [&](bool need_E) {
          if (B.has(print(left))) return true;  // left conclusion set present
          for (auto& c : params) {
            if (need_E && !has_E(c)) continue;
            bool apart = B.has(print(norm(mk_neq(mk_param(c), mk_param(b))))) ||
                         B.has(print(norm(mk_neq(mk_param(b), mk_param(c)))));
            if (apart && B.has(print(cached_subst(dd->body, dd->name, c, false))))
              return true;
          }
          return false;
        };
        if (on(Rule::neg_iota_E1) && !satisfied_fresh(false)) {
          RuleInstance inst;
          inst.rule = Rule::neg_iota_E1;
          inst.premises = {B.keys[i]};
          inst.needs_fresh = true;
          inst.body = dd->body;
          inst.binder = dd->name;
          inst.bparam = b;
          out.push_back(std::move(inst));
        }
        if (on(Rule::neg_iota_E2) && has_E(b) && !satisfied_fresh(true)) {
          RuleInstance inst;
          inst.rule = Rule::neg_iota_E2;
          inst.premises = {B.keys[i], "E!(" + b + ")"};
          inst.needs_fresh = true;
          inst.body = dd->body;
          inst.binder = dd->name;
          inst.bparam = b;
          out.push_back(std::move(inst));
        }
      }
    }
  }

  void cut_rules() {
    if (!on(Rule::cut1) && !on(Rule::cut2)) return;
    for (auto& b : params) {
      if (on(Rule::cut2) && !has_E(b)) continue;
      for (auto& dd : closed_dds) {
        FormulaPtr eq = cached_eq(b, dd, false);
        FormulaPtr neq = cached_eq(b, dd, true);
        if (on(Rule::cut1))
          emit(Rule::cut1, {}, b + "|" + print(dd), {{eq}, {neq}});
        else
          emit(Rule::cut2, {"E!(" + b + ")"}, b + "|" + print(dd), {{eq}, {neq}});
      }
    }
  }

  void equality_rules() {
    if (!on(Rule::eq_E)) return;
    for (size_t i = 0; i < B.formulas.size(); ++i) {
      const FormulaPtr& f = B.formulas[i];
      if (f->kind != FormulaKind::Eq) continue;
      const TermPtr sides[2] = {f->lhs, f->rhs};
      for (int o = 0; o < 2; ++o) {
        const TermPtr& src = sides[o];
        const TermPtr& dst = sides[1 - o];
        std::string src_key = key_of(src);
        if (src_key == key_of(dst)) continue;
        for (size_t g = 0; g < B.formulas.size(); ++g) {
          int n = cached_count_occurrences(B.formulas[g], src_key);
          for (int occ = 0; occ < n; ++occ) {
            std::string focus =
                (o ? "rl|" : "lr|") + B.keys[g] + "|" + std::to_string(occ);
            if (done(Rule::eq_E, {B.keys[i]}, focus)) continue;
            FormulaPtr res = cached_rewrite(B.formulas[g], src_key, dst, occ);
            if (B.has(print(res))) continue;
            // skip rewrites that introduce a description term new to the
            // branch; the congruence closure over branch terms is unaffected
            // and formula growth stays bounded
            bool new_dd = false;
            for (auto& d : descr_subterms_of(res))
              if (term_closed(d) && !closed_dd_keys.count(print(d))) {
                new_dd = true;
                break;
              }
            if (new_dd) continue;
            // rewriting inside literals is cheap congruence reasoning and
            // often closes a branch; rewriting inside bigger formulas
            // re-spawns their whole decomposition, so schedule it last
            const FormulaPtr& tgt = B.formulas[g];
            const FormulaPtr& lit =
                tgt->kind == FormulaKind::Not ? tgt->sub : tgt;
            bool literal = lit->kind == FormulaKind::Atom ||
                           lit->kind == FormulaKind::Eq ||
                           lit->kind == FormulaKind::ExistsPred;
            emit(Rule::eq_E, {B.keys[i]}, focus, {{res}}, literal ? 1 : 7);
          }
        }
      }
    }
  }
};

}  // namespace detail

// All instances currently constructible on B (the engine filters out those
// already applied). Deterministic order; closure instances first.
inline std::vector<RuleInstance> applicable_instances(
    const BranchView& B, Logic logic, bool nonempty = false,
    const std::unordered_set<std::string>* applied = nullptr) {
  static thread_local std::map<std::pair<Logic, bool>, std::set<Rule>> table_cache;
  auto& rules = table_cache.emplace(std::make_pair(logic, nonempty),
                                    std::set<Rule>{}).first->second;
  if (rules.empty()) rules = rules_for_logic(logic, nonempty);

  detail::InstanceGen gen(B, logic, rules, applied);
  gen.closure_rules();
  gen.propositional();
  gen.quantifier_rules();
  gen.existence_rules();
  gen.iota_rules();
  gen.cut_rules();
  gen.equality_rules();
  return std::move(gen.out);
}

// Conclusion sets of an instance, exactly per the rule schemas; fresh
// parameters are drawn from the generator. All formulas alpha-normal.
inline std::vector<std::vector<FormulaPtr>> apply_instance(const RuleInstance& inst,
                                                           FreshGen& fresh,
                                                           const std::string& preset = "") {
  auto norm = [](const FormulaPtr& f) { return alpha_normalize(f); };
  if (!inst.needs_fresh) return inst.concl;
  std::string a = preset.empty() ? fresh.next() : preset;
  switch (inst.rule) {
    case Rule::neg_forall_E1:
      return {{norm(mk_not(substitute(inst.body, inst.binder, mk_param(a))))}};
    case Rule::neg_forall_E2:
      return {{norm(mk_exists_pred(mk_param(a))),
               norm(mk_not(substitute(inst.body, inst.binder, mk_param(a))))}};
    case Rule::ex_E1:
    case Rule::eq_I1:
    case Rule::eq_I2:
      return {{norm(mk_eq(mk_param(a), inst.target))}};
    case Rule::ex_I4:
      return {{norm(mk_exists_pred(mk_param(a)))}};
    case Rule::neg_iota_E1:
      return {{norm(mk_not(substitute(inst.body, inst.binder, mk_param(inst.bparam))))},
              {norm(mk_neq(mk_param(a), mk_param(inst.bparam))),
               norm(substitute(inst.body, inst.binder, mk_param(a)))}};
    case Rule::neg_iota_E2:
      return {{norm(mk_not(substitute(inst.body, inst.binder, mk_param(inst.bparam))))},
              {norm(mk_neq(mk_param(a), mk_param(inst.bparam))),
               norm(substitute(inst.body, inst.binder, mk_param(a))),
               norm(mk_exists_pred(mk_param(a)))}};
    default:
      throw std::logic_error("apply_instance: unexpected fresh rule");
  }
}

inline bool is_tier2(Rule r) {
  return r == Rule::cut1 || r == Rule::cut2 || r == Rule::eq_E;
}

// scheduling priority (closure instances are always preferred by the engine):
// cheap decompositions first, per-parameter branching rules last
inline int rule_priority(Rule r) {
  switch (r) {
    case Rule::bot1:
    case Rule::bot2:
    case Rule::bot3:
      return 0;
    case Rule::neg_neg_E:
    case Rule::and_E:
    case Rule::ex_E2:
    case Rule::ex_I1:
    case Rule::ex_I2:
    case Rule::ex_I3:
      return 1;  // non-branching, bounded conclusions
    case Rule::neg_forall_E1:
    case Rule::neg_forall_E2:
    case Rule::ex_E1:
    case Rule::eq_I1:
    case Rule::eq_I2:
    case Rule::ex_I4:
      return 2;  // non-branching, introduce a fresh parameter
    case Rule::neg_and_E:
    case Rule::neg_iota_E1:
    case Rule::neg_iota_E2:
      return 3;  // branching
    case Rule::iota_E1:
    case Rule::iota_E2:
      return 4;  // per-parameter branching, but bounded per identity
    case Rule::cut1:
    case Rule::cut2:
      return 5;  // per (parameter, description) branching
    case Rule::forall_E1:
    case Rule::forall_E2:
      return 6;  // generative: instantiation feeds every other rule
    case Rule::eq_E:
      return 7;  // non-literal rewrites (literal ones get priority 1)
  }
  return 7;
}

}  // namespace freedesc
