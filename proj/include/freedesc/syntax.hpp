#pragma once

// Abstract syntax, concrete grammar, alpha-normalization and capture-safe
// substitution for the description languages L (with the existence predicate
// E!) and L- (without it).
//
// Terms:    bound variable | parameter | description "the x. (phi)"
// Formulas: P(t1,...,tn) | t1 = t2 | E!(t) | ~phi | phi & psi | forall x phi
// plus surface sugar (|, ->, <->, exists) removed by desugar().

#include <algorithm>
#include <cctype>
#include <map>
#include <unordered_map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace freedesc {

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

enum class TermKind { BoundVar, Param, Descr };

struct Term {
  TermKind kind;
  std::string name;  // variable/parameter name, or the binder for Descr
  FormulaPtr body;   // Descr only
  mutable std::string key_cache;    // memoized key_of
  mutable std::string print_cache;  // memoized print
};
using TermPtr = std::shared_ptr<const Term>;

enum class FormulaKind {
  Atom, Eq, ExistsPred, Not, And, Forall,
  // surface-only kinds, removed by desugar():
  Or, Imp, Iff, Exists
};

struct Formula {
  FormulaKind kind;
  std::string name;           // Atom: predicate; Forall/Exists: binder
  std::vector<TermPtr> args;  // Atom
  TermPtr lhs, rhs;           // Eq; ExistsPred uses lhs only
  FormulaPtr sub, sub2;       // Not: sub; And/Or/Imp/Iff: sub,sub2; quantifiers: sub
  mutable std::string key_cache;    // memoized key_of
  mutable std::string print_cache;  // memoized print
};

// ---------------------------------------------------------------------------
// constructors

inline TermPtr mk_bound(std::string name) {
  return std::make_shared<Term>(Term{TermKind::BoundVar, std::move(name), nullptr});
}
inline TermPtr mk_param(std::string name) {
  return std::make_shared<Term>(Term{TermKind::Param, std::move(name), nullptr});
}
inline TermPtr mk_descr(std::string binder, FormulaPtr body) {
  return std::make_shared<Term>(Term{TermKind::Descr, std::move(binder), std::move(body)});
}

inline FormulaPtr mk_atom(std::string pred, std::vector<TermPtr> args) {
  auto f = std::make_shared<Formula>();
  f->kind = FormulaKind::Atom;
  f->name = std::move(pred);
  f->args = std::move(args);
  return f;
}
inline FormulaPtr mk_eq(TermPtr l, TermPtr r) {
  auto f = std::make_shared<Formula>();
  f->kind = FormulaKind::Eq;
  f->lhs = std::move(l);
  f->rhs = std::move(r);
  return f;
}
inline FormulaPtr mk_exists_pred(TermPtr t) {
  auto f = std::make_shared<Formula>();
  f->kind = FormulaKind::ExistsPred;
  f->lhs = std::move(t);
  return f;
}
inline FormulaPtr mk_not(FormulaPtr a) {
  auto f = std::make_shared<Formula>();
  f->kind = FormulaKind::Not;
  f->sub = std::move(a);
  return f;
}
inline FormulaPtr mk_binary(FormulaKind k, FormulaPtr a, FormulaPtr b) {
  auto f = std::make_shared<Formula>();
  f->kind = k;
  f->sub = std::move(a);
  f->sub2 = std::move(b);
  return f;
}
inline FormulaPtr mk_and(FormulaPtr a, FormulaPtr b) { return mk_binary(FormulaKind::And, std::move(a), std::move(b)); }
inline FormulaPtr mk_quant(FormulaKind k, std::string binder, FormulaPtr body) {
  auto f = std::make_shared<Formula>();
  f->kind = k;
  f->name = std::move(binder);
  f->sub = std::move(body);
  return f;
}
inline FormulaPtr mk_forall(std::string binder, FormulaPtr body) {
  return mk_quant(FormulaKind::Forall, std::move(binder), std::move(body));
}
inline FormulaPtr mk_neq(TermPtr l, TermPtr r) { return mk_not(mk_eq(std::move(l), std::move(r))); }

inline bool is_core(const Formula& f) {
  switch (f.kind) {
    case FormulaKind::Or:
    case FormulaKind::Imp:
    case FormulaKind::Iff:
    case FormulaKind::Exists:
      return false;
    default:
      return true;
  }
}

// ---------------------------------------------------------------------------
// desugar: | -> <-> exists  ==>  ~ & forall

inline FormulaPtr desugar(const FormulaPtr& f);

inline TermPtr desugar_term(const TermPtr& t) {
  if (t->kind != TermKind::Descr) return t;
  return mk_descr(t->name, desugar(t->body));
}

inline FormulaPtr desugar(const FormulaPtr& f) {
  switch (f->kind) {
    case FormulaKind::Atom: {
      std::vector<TermPtr> args;
      args.reserve(f->args.size());
      for (auto& a : f->args) args.push_back(desugar_term(a));
      return mk_atom(f->name, std::move(args));
    }
    case FormulaKind::Eq:
      return mk_eq(desugar_term(f->lhs), desugar_term(f->rhs));
    case FormulaKind::ExistsPred:
      return mk_exists_pred(desugar_term(f->lhs));
    case FormulaKind::Not:
      return mk_not(desugar(f->sub));
    case FormulaKind::And:
      return mk_and(desugar(f->sub), desugar(f->sub2));
    case FormulaKind::Forall:
      return mk_forall(f->name, desugar(f->sub));
    case FormulaKind::Or:  // a | b  ==>  ~(~a & ~b)
      return mk_not(mk_and(mk_not(desugar(f->sub)), mk_not(desugar(f->sub2))));
    case FormulaKind::Imp:  // a -> b  ==>  ~(a & ~b)
      return mk_not(mk_and(desugar(f->sub), mk_not(desugar(f->sub2))));
    case FormulaKind::Iff: {  // a <-> b  ==>  ~(a & ~b) & ~(b & ~a)
      auto a = desugar(f->sub);
      auto b = desugar(f->sub2);
      return mk_and(mk_not(mk_and(a, mk_not(b))), mk_not(mk_and(b, mk_not(a))));
    }
    case FormulaKind::Exists:  // exists x phi  ==>  ~forall x ~phi
      return mk_not(mk_forall(f->name, mk_not(desugar(f->sub))));
  }
  throw std::logic_error("desugar: bad kind");
}

// ---------------------------------------------------------------------------
// free bound variables / closedness

inline void free_bound_vars(const FormulaPtr& f, std::set<std::string>& scope,
                            std::set<std::string>& out);

inline void free_bound_vars(const TermPtr& t, std::set<std::string>& scope,
                            std::set<std::string>& out) {
  switch (t->kind) {
    case TermKind::BoundVar:
      if (!scope.count(t->name)) out.insert(t->name);
      break;
    case TermKind::Param:
      break;
    case TermKind::Descr: {
      bool added = scope.insert(t->name).second;
      free_bound_vars(t->body, scope, out);
      if (added) scope.erase(t->name);
      break;
    }
  }
}

inline void free_bound_vars(const FormulaPtr& f, std::set<std::string>& scope,
                            std::set<std::string>& out) {
  switch (f->kind) {
    case FormulaKind::Atom:
      for (auto& a : f->args) free_bound_vars(a, scope, out);
      break;
    case FormulaKind::Eq:
      free_bound_vars(f->lhs, scope, out);
      free_bound_vars(f->rhs, scope, out);
      break;
    case FormulaKind::ExistsPred:
      free_bound_vars(f->lhs, scope, out);
      break;
    case FormulaKind::Not:
      free_bound_vars(f->sub, scope, out);
      break;
    case FormulaKind::And:
    case FormulaKind::Or:
    case FormulaKind::Imp:
    case FormulaKind::Iff:
      free_bound_vars(f->sub, scope, out);
      free_bound_vars(f->sub2, scope, out);
      break;
    case FormulaKind::Forall:
    case FormulaKind::Exists: {
      bool added = scope.insert(f->name).second;
      free_bound_vars(f->sub, scope, out);
      if (added) scope.erase(f->name);
      break;
    }
  }
}

inline std::set<std::string> free_bound_vars(const TermPtr& t) {
  std::set<std::string> scope, out;
  free_bound_vars(t, scope, out);
  return out;
}
inline std::set<std::string> free_bound_vars(const FormulaPtr& f) {
  std::set<std::string> scope, out;
  free_bound_vars(f, scope, out);
  return out;
}

inline bool term_closed(const TermPtr& t) { return free_bound_vars(t).empty(); }
inline bool formula_closed(const FormulaPtr& f) { return free_bound_vars(f).empty(); }

// ---------------------------------------------------------------------------
// substitution: phi[x/t] for closed t (no capture possible)

inline FormulaPtr substitute(const FormulaPtr& f, const std::string& var, const TermPtr& t);

inline TermPtr substitute(const TermPtr& s, const std::string& var, const TermPtr& t) {
  switch (s->kind) {
    case TermKind::BoundVar:
      return s->name == var ? t : s;
    case TermKind::Param:
      return s;
    case TermKind::Descr:
      if (s->name == var) return s;  // rebinding: no free occurrence below
      return mk_descr(s->name, substitute(s->body, var, t));
  }
  throw std::logic_error("substitute: bad term kind");
}

inline FormulaPtr substitute(const FormulaPtr& f, const std::string& var, const TermPtr& t) {
  switch (f->kind) {
    case FormulaKind::Atom: {
      std::vector<TermPtr> args;
      args.reserve(f->args.size());
      for (auto& a : f->args) args.push_back(substitute(a, var, t));
      return mk_atom(f->name, std::move(args));
    }
    case FormulaKind::Eq:
      return mk_eq(substitute(f->lhs, var, t), substitute(f->rhs, var, t));
    case FormulaKind::ExistsPred:
      return mk_exists_pred(substitute(f->lhs, var, t));
    case FormulaKind::Not:
      return mk_not(substitute(f->sub, var, t));
    case FormulaKind::And:
      return mk_and(substitute(f->sub, var, t), substitute(f->sub2, var, t));
    case FormulaKind::Forall:
      if (f->name == var) return f;
      return mk_forall(f->name, substitute(f->sub, var, t));
    default:
      throw std::invalid_argument("substitute: formula must be desugared first");
  }
}

// Checked entry point: rejects open replacement terms.
inline FormulaPtr substitute_closed(const FormulaPtr& f, const std::string& var, const TermPtr& t) {
  if (!term_closed(t)) throw std::invalid_argument("substitute: replacement term is not closed");
  return substitute(f, var, t);
}

// ---------------------------------------------------------------------------
// alpha-normalization: binder at nesting depth d is renamed to "_v<d>".
// Alpha-equivalent inputs map to identical trees; idempotent.

namespace detail {

inline std::string canon_binder(int depth) { return "_v" + std::to_string(depth); }

inline FormulaPtr norm_f(const FormulaPtr& f, std::map<std::string, std::string>& env, int depth);

inline TermPtr norm_t(const TermPtr& t, std::map<std::string, std::string>& env, int depth) {
  switch (t->kind) {
    case TermKind::BoundVar: {
      auto it = env.find(t->name);
      return it == env.end() ? t : mk_bound(it->second);
    }
    case TermKind::Param:
      return t;
    case TermKind::Descr: {
      std::string fresh = canon_binder(depth);
      auto saved = env.find(t->name) == env.end() ? std::optional<std::string>{}
                                                  : std::optional<std::string>{env[t->name]};
      env[t->name] = fresh;
      auto body = norm_f(t->body, env, depth + 1);
      if (saved) env[t->name] = *saved; else env.erase(t->name);
      return mk_descr(fresh, std::move(body));
    }
  }
  throw std::logic_error("norm_t: bad kind");
}

inline FormulaPtr norm_f(const FormulaPtr& f, std::map<std::string, std::string>& env, int depth) {
  switch (f->kind) {
    case FormulaKind::Atom: {
      std::vector<TermPtr> args;
      args.reserve(f->args.size());
      for (auto& a : f->args) args.push_back(norm_t(a, env, depth));
      return mk_atom(f->name, std::move(args));
    }
    case FormulaKind::Eq:
      return mk_eq(norm_t(f->lhs, env, depth), norm_t(f->rhs, env, depth));
    case FormulaKind::ExistsPred:
      return mk_exists_pred(norm_t(f->lhs, env, depth));
    case FormulaKind::Not:
      return mk_not(norm_f(f->sub, env, depth));
    case FormulaKind::And:
      return mk_and(norm_f(f->sub, env, depth), norm_f(f->sub2, env, depth));
    case FormulaKind::Forall: {
      std::string fresh = canon_binder(depth);
      auto saved = env.find(f->name) == env.end() ? std::optional<std::string>{}
                                                  : std::optional<std::string>{env[f->name]};
      env[f->name] = fresh;
      auto body = norm_f(f->sub, env, depth + 1);
      if (saved) env[f->name] = *saved; else env.erase(f->name);
      return mk_forall(fresh, std::move(body));
    }
    default:
      throw std::invalid_argument("alpha_normalize: formula must be desugared first");
  }
}

}  // namespace detail

inline FormulaPtr alpha_normalize(const FormulaPtr& f) {
  std::map<std::string, std::string> env;
  return detail::norm_f(f, env, 0);
}
inline TermPtr alpha_normalize(const TermPtr& t) {
  std::map<std::string, std::string> env;
  return detail::norm_t(t, env, 0);
}

// ---------------------------------------------------------------------------
// printing (round-trips with parse up to desugaring)

inline std::string print(const FormulaPtr& f);

inline std::string print(const TermPtr& t) {
  switch (t->kind) {
    case TermKind::BoundVar:
    case TermKind::Param:
      return t->name;
    case TermKind::Descr:
      if (t->print_cache.empty())
        t->print_cache = "the " + t->name + ". (" + print(t->body) + ")";
      return t->print_cache;
  }
  throw std::logic_error("print: bad term kind");
}

namespace detail {

inline bool atomic_like(const Formula& f) {
  switch (f.kind) {
    case FormulaKind::Atom:
    case FormulaKind::Eq:
    case FormulaKind::ExistsPred:
      return true;
    case FormulaKind::Not:
      return f.sub->kind == FormulaKind::Eq;  // printed as "!="
    default:
      return false;
  }
}

inline std::string print_operand(const FormulaPtr& f) {
  if (atomic_like(*f) || f->kind == FormulaKind::Not) return print(f);
  return "(" + print(f) + ")";
}

}  // namespace detail

namespace detail {
inline std::string print_uncached(const FormulaPtr& f);
}

inline std::string print(const FormulaPtr& f) {
  if (f->print_cache.empty()) f->print_cache = detail::print_uncached(f);
  return f->print_cache;
}

inline std::string detail::print_uncached(const FormulaPtr& f) {
  switch (f->kind) {
    case FormulaKind::Atom: {
      if (f->args.empty()) return f->name;
      std::string s = f->name + "(";
      for (size_t i = 0; i < f->args.size(); ++i) {
        if (i) s += ", ";
        s += print(f->args[i]);
      }
      return s + ")";
    }
    case FormulaKind::Eq:
      return print(f->lhs) + " = " + print(f->rhs);
    case FormulaKind::ExistsPred:
      return "E!(" + print(f->lhs) + ")";
    case FormulaKind::Not:
      if (f->sub->kind == FormulaKind::Eq)
        return print(f->sub->lhs) + " != " + print(f->sub->rhs);
      return "~" + detail::print_operand(f->sub);
    case FormulaKind::And:
      return detail::print_operand(f->sub) + " & " + detail::print_operand(f->sub2);
    case FormulaKind::Or:
      return detail::print_operand(f->sub) + " | " + detail::print_operand(f->sub2);
    case FormulaKind::Imp:
      return detail::print_operand(f->sub) + " -> " + detail::print_operand(f->sub2);
    case FormulaKind::Iff:
      return detail::print_operand(f->sub) + " <-> " + detail::print_operand(f->sub2);
    case FormulaKind::Forall:
      return "forall " + f->name + ". " + print(f->sub);
    case FormulaKind::Exists:
      return "exists " + f->name + ". " + print(f->sub);
  }
  throw std::logic_error("print: bad kind");
}

// Canonical key: print of the alpha-normal form. Used wherever the calculi
// demand syntactic identity of formulas or terms.
inline std::string key_of(const FormulaPtr& f) {
  if (f->key_cache.empty()) f->key_cache = print(alpha_normalize(f));
  return f->key_cache;
}
inline std::string key_of(const TermPtr& t) {
  if (t->key_cache.empty()) t->key_cache = print(alpha_normalize(t));
  return t->key_cache;
}

inline bool alpha_equal(const FormulaPtr& a, const FormulaPtr& b) { return key_of(a) == key_of(b); }
inline bool alpha_equal(const TermPtr& a, const TermPtr& b) { return key_of(a) == key_of(b); }

// ---------------------------------------------------------------------------
// term collections

namespace detail {

inline void collect_descrs(const FormulaPtr& f, std::vector<TermPtr>& out);

inline void collect_descrs(const TermPtr& t, std::vector<TermPtr>& out) {
  if (t->kind != TermKind::Descr) return;
  out.push_back(t);
  collect_descrs(t->body, out);
}

inline void collect_descrs(const FormulaPtr& f, std::vector<TermPtr>& out) {
  switch (f->kind) {
    case FormulaKind::Atom:
      for (auto& a : f->args) collect_descrs(a, out);
      break;
    case FormulaKind::Eq:
      collect_descrs(f->lhs, out);
      collect_descrs(f->rhs, out);
      break;
    case FormulaKind::ExistsPred:
      collect_descrs(f->lhs, out);
      break;
    case FormulaKind::Not:
      collect_descrs(f->sub, out);
      break;
    case FormulaKind::And:
    case FormulaKind::Or:
    case FormulaKind::Imp:
    case FormulaKind::Iff:
      collect_descrs(f->sub, out);
      collect_descrs(f->sub2, out);
      break;
    case FormulaKind::Forall:
    case FormulaKind::Exists:
      collect_descrs(f->sub, out);
      break;
  }
}

inline void collect_params(const FormulaPtr& f, std::vector<std::string>& out, std::set<std::string>& seen);

inline void collect_params(const TermPtr& t, std::vector<std::string>& out, std::set<std::string>& seen) {
  switch (t->kind) {
    case TermKind::Param:
      if (seen.insert(t->name).second) out.push_back(t->name);
      break;
    case TermKind::Descr:
      collect_params(t->body, out, seen);
      break;
    default:
      break;
  }
}

inline void collect_params(const FormulaPtr& f, std::vector<std::string>& out, std::set<std::string>& seen) {
  switch (f->kind) {
    case FormulaKind::Atom:
      for (auto& a : f->args) collect_params(a, out, seen);
      break;
    case FormulaKind::Eq:
      collect_params(f->lhs, out, seen);
      collect_params(f->rhs, out, seen);
      break;
    case FormulaKind::ExistsPred:
      collect_params(f->lhs, out, seen);
      break;
    case FormulaKind::Not:
      collect_params(f->sub, out, seen);
      break;
    case FormulaKind::And:
    case FormulaKind::Or:
    case FormulaKind::Imp:
    case FormulaKind::Iff:
      collect_params(f->sub, out, seen);
      collect_params(f->sub2, out, seen);
      break;
    case FormulaKind::Forall:
    case FormulaKind::Exists:
      collect_params(f->sub, out, seen);
      break;
  }
}

// per-formula description subterms, memoized: branches re-scan the same
// formulas on every visit
inline const std::vector<TermPtr>& descr_subterms_of(const FormulaPtr& f) {
  thread_local std::unordered_map<std::string, std::vector<TermPtr>> memo;
  std::string k = print(f);
  auto it = memo.find(k);
  if (it != memo.end()) return it->second;
  std::vector<TermPtr> raw, out;
  std::set<std::string> seen;
  collect_descrs(f, raw);
  for (auto& d : raw) {
    TermPtr canon = term_closed(d) ? alpha_normalize(d) : d;
    if (seen.insert(print(canon)).second) out.push_back(canon);
  }
  return memo.emplace(std::move(k), std::move(out)).first->second;
}

}  // namespace detail

// All description subterms (nested included). Closed ones are returned in
// standalone alpha-normal form; open ones as they occur. Deduplicated by key.
template <typename FormulaRange>
std::vector<TermPtr> dd_subterms(const FormulaRange& formulas) {
  std::vector<TermPtr> out;
  std::set<std::string> seen;
  for (const auto& f : formulas)
    for (const auto& d : detail::descr_subterms_of(f))
      if (seen.insert(print(d)).second) out.push_back(d);
  return out;
}

// Parameters occurring anywhere in the set, in first-occurrence order.
template <typename FormulaRange>
std::vector<std::string> params_of(const FormulaRange& formulas) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& f : formulas) detail::collect_params(f, out, seen);
  return out;
}

// ---------------------------------------------------------------------------
// parser

enum class LanguageMode { L, Lminus };

struct ParseError : std::runtime_error {
  size_t pos;
  ParseError(const std::string& msg, size_t p)
      : std::runtime_error(msg + " (at offset " + std::to_string(p) + ")"), pos(p) {}
};

namespace detail {

enum class Tok {
  Ident, Forall, Exists, The, LParen, RParen, Comma, Dot,
  Eq, Neq, Tilde, Amp, Pipe, Arrow, Iff, EBang, End
};

struct Token {
  Tok kind;
  std::string text;
  size_t pos;
};

inline std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  size_t i = 0, n = src.size();
  auto push = [&](Tok k, std::string t, size_t p) { out.push_back({k, std::move(t), p}); };
  while (i < n) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) { ++i; continue; }
    size_t p = i;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i;
      while (j < n && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_' || src[j] == '\'')) ++j;
      std::string word(src.substr(i, j - i));
      i = j;
      if (word == "E" && i < n && src[i] == '!') { ++i; push(Tok::EBang, "E!", p); continue; }
      if (word == "forall") { push(Tok::Forall, word, p); continue; }
      if (word == "exists") { push(Tok::Exists, word, p); continue; }
      if (word == "the") { push(Tok::The, word, p); continue; }
      push(Tok::Ident, word, p);
      continue;
    }
    switch (c) {
      case '(': push(Tok::LParen, "(", p); ++i; break;
      case ')': push(Tok::RParen, ")", p); ++i; break;
      case ',': push(Tok::Comma, ",", p); ++i; break;
      case '.': push(Tok::Dot, ".", p); ++i; break;
      case '=': push(Tok::Eq, "=", p); ++i; break;
      case '~': push(Tok::Tilde, "~", p); ++i; break;
      case '&': push(Tok::Amp, "&", p); ++i; break;
      case '|': push(Tok::Pipe, "|", p); ++i; break;
      case '!':
        if (i + 1 < n && src[i + 1] == '=') { push(Tok::Neq, "!=", p); i += 2; break; }
        throw ParseError("unexpected '!'", p);
      case '-':
        if (i + 1 < n && src[i + 1] == '>') { push(Tok::Arrow, "->", p); i += 2; break; }
        throw ParseError("unexpected '-'", p);
      case '<':
        if (i + 2 < n && src[i + 1] == '-' && src[i + 2] == '>') { push(Tok::Iff, "<->", p); i += 3; break; }
        throw ParseError("unexpected '<'", p);
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", p);
    }
  }
  out.push_back({Tok::End, "", n});
  return out;
}

class Parser {
 public:
  Parser(std::string_view src, LanguageMode mode) : toks_(lex(src)), mode_(mode) {}

  FormulaPtr run() {
    FormulaPtr f = formula();
    expect(Tok::End, "end of input");
    check_arities(f);
    return f;
  }

 private:
  std::vector<Token> toks_;
  size_t at_ = 0;
  LanguageMode mode_;
  std::set<std::string> scope_;
  std::map<std::string, size_t> arity_;

  const Token& cur() const { return toks_[at_]; }
  bool accept(Tok k) {
    if (cur().kind == k) { ++at_; return true; }
    return false;
  }
  Token expect(Tok k, const char* what) {
    if (cur().kind != k) throw ParseError(std::string("expected ") + what, cur().pos);
    return toks_[at_++];
  }

  FormulaPtr formula() {  // <-> (lowest)
    FormulaPtr f = imp();
    while (accept(Tok::Iff)) f = mk_binary(FormulaKind::Iff, f, imp());
    return f;
  }
  FormulaPtr imp() {  // right-assoc
    FormulaPtr f = disj();
    if (accept(Tok::Arrow)) return mk_binary(FormulaKind::Imp, f, imp());
    return f;
  }
  FormulaPtr disj() {
    FormulaPtr f = conj();
    while (accept(Tok::Pipe)) f = mk_binary(FormulaKind::Or, f, conj());
    return f;
  }
  FormulaPtr conj() {
    FormulaPtr f = unary();
    while (accept(Tok::Amp)) f = mk_and(f, unary());
    return f;
  }

  FormulaPtr unary() {
    if (accept(Tok::Tilde)) return mk_not(unary());
    if (cur().kind == Tok::Forall || cur().kind == Tok::Exists) return quantifier();
    return primary();
  }

  FormulaPtr quantifier() {
    bool uni = cur().kind == Tok::Forall;
    ++at_;
    Token v = expect(Tok::Ident, "bound variable after quantifier");
    if (scope_.count(v.text))
      throw ParseError("rebinding of in-scope variable '" + v.text + "'", v.pos);
    expect(Tok::Dot, "'.' after quantifier variable");
    scope_.insert(v.text);
    FormulaPtr body = formula();  // scope maximal to the right
    scope_.erase(v.text);
    return mk_quant(uni ? FormulaKind::Forall : FormulaKind::Exists, v.text, body);
  }

  FormulaPtr primary() {
    if (accept(Tok::LParen)) {
      FormulaPtr f = formula();
      expect(Tok::RParen, "')'");
      return f;
    }
    if (cur().kind == Tok::EBang) {
      size_t p = cur().pos;
      ++at_;
      if (mode_ == LanguageMode::Lminus)
        throw ParseError("existence predicate not in L-", p);
      expect(Tok::LParen, "'(' after E!");
      TermPtr t = term();
      expect(Tok::RParen, "')'");
      return mk_exists_pred(t);
    }
    if (cur().kind == Tok::The) {
      TermPtr l = term();
      return equality_rest(l);
    }
    if (cur().kind == Tok::Ident) {
      Token id = toks_[at_++];
      if (accept(Tok::LParen)) {
        std::vector<TermPtr> args;
        if (!accept(Tok::RParen)) {
          args.push_back(term());
          while (accept(Tok::Comma)) args.push_back(term());
          expect(Tok::RParen, "')'");
        }
        if (cur().kind == Tok::Eq || cur().kind == Tok::Neq)
          throw ParseError("predicate application is not a term", cur().pos);
        note_arity(id, args.size());
        return mk_atom(id.text, std::move(args));
      }
      if (cur().kind == Tok::Eq || cur().kind == Tok::Neq)
        return equality_rest(ident_term(id));
      if (scope_.count(id.text))
        throw ParseError("bound variable '" + id.text + "' used as a formula", id.pos);
      note_arity(id, 0);
      return mk_atom(id.text, {});
    }
    throw ParseError("expected a formula", cur().pos);
  }

  FormulaPtr equality_rest(TermPtr lhs) {
    if (accept(Tok::Eq)) return mk_eq(std::move(lhs), term());
    if (accept(Tok::Neq)) return mk_neq(std::move(lhs), term());
    throw ParseError("expected '=' or '!=' after term", cur().pos);
  }

  TermPtr term() {
    if (accept(Tok::The)) {
      Token v = expect(Tok::Ident, "bound variable after 'the'");
      if (scope_.count(v.text))
        throw ParseError("rebinding of in-scope variable '" + v.text + "'", v.pos);
      expect(Tok::Dot, "'.' after description variable");
      expect(Tok::LParen, "'(' around description body");
      scope_.insert(v.text);
      FormulaPtr body = formula();
      scope_.erase(v.text);
      expect(Tok::RParen, "')'");
      return mk_descr(v.text, body);
    }
    Token id = expect(Tok::Ident, "a term");
    return ident_term(id);
  }

  TermPtr ident_term(const Token& id) {
    return scope_.count(id.text) ? mk_bound(id.text) : mk_param(id.text);
  }

  void note_arity(const Token& id, size_t n) {
    auto [it, fresh] = arity_.emplace(id.text, n);
    if (!fresh && it->second != n)
      throw ParseError("predicate '" + id.text + "' used with inconsistent arity", id.pos);
  }

  void check_arities(const FormulaPtr&) {}  // enforced incrementally in note_arity
};

}  // namespace detail

// Parses a sentence of the concrete grammar and desugars derived connectives.
inline FormulaPtr parse(std::string_view text, LanguageMode mode = LanguageMode::L) {
  detail::Parser p(text, mode);
  return desugar(p.run());
}

}  // namespace freedesc
