// Acceptance gate: runs the nine release criteria end to end and prints one
// PASS/FAIL line per criterion. Exits 0 iff all nine pass.

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "freedesc/engine.hpp"
#include "freedesc/oracle.hpp"
#include "../tests/gen.hpp"

using namespace freedesc;

namespace {

const std::vector<Logic> kAll = {Logic::PFL, Logic::NFL, Logic::PQFL, Logic::NQFL,
                                 Logic::NQFLminus};

LanguageMode mode_of(Logic l) {
  return l == Logic::NQFLminus ? LanguageMode::Lminus : LanguageMode::L;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

SearchResult run(Logic logic, const std::string& text, bool satisfy = false,
                 long budget = 50000, bool nonempty = false) {
  Problem p;
  p.logic = logic;
  p.goal = parse(text, mode_of(logic));
  p.satisfy = satisfy;
  p.budget = budget;
  p.nonempty = nonempty;
  return search(p);
}

// re-verify a refutation against its own open branch, independently of the
// engine's internal check
bool countermodel_ok(const SearchResult& r, Logic logic) {
  if (!r.model) return false;
  BranchView b;
  for (auto& k : r.open_branch) b.add(alpha_normalize(parse(k, mode_of(logic))));
  return verify_model(*r.model, b, logic).empty();
}

void report(int n, bool ok, const std::string& what) {
  std::printf("%s: criterion %d (%s)\n", ok ? "PASS" : "FAIL", n, what.c_str());
}

const char* kLambert =
    "forall x. ((the y.(Q(y)) = x) <-> forall z. (Q(z) <-> z = x))";
const char* kRussellLtR =
    "P(the x.(Q(x))) -> exists y. ((forall x. (Q(x) <-> x = y)) & P(y))";
const char* kRussellRtL =
    "(exists y. ((forall x. (Q(x) <-> x = y)) & P(y))) -> P(the x.(Q(x)))";

bool criterion1() {
  for (Logic l : kAll) {
    auto t0 = std::chrono::steady_clock::now();
    SearchResult r = run(l, kLambert);
    double dt = seconds_since(t0);
    if (r.verdict != Verdict::Proved || r.steps > 50000 || dt > 10.0) {
      std::printf("  [1] %s: verdict=%d steps=%ld time=%.2fs\n", logic_name(l),
                  static_cast<int>(r.verdict), r.steps, dt);
      return false;
    }
  }
  return true;
}

bool criterion2() {
  for (Logic l : kAll) {
    SearchResult rtl = run(l, kRussellRtL);
    if (rtl.verdict != Verdict::Proved) {
      std::printf("  [2] RtL %s not proved\n", logic_name(l));
      return false;
    }
  }
  for (Logic l : {Logic::NFL, Logic::NQFL, Logic::NQFLminus}) {
    SearchResult ltr = run(l, kRussellLtR);
    if (ltr.verdict != Verdict::Proved) {
      std::printf("  [2] LtR %s not proved\n", logic_name(l));
      return false;
    }
  }
  for (Logic l : {Logic::PFL, Logic::PQFL}) {
    SearchResult ltr = run(l, kRussellLtR);
    if (ltr.verdict != Verdict::Refuted || !countermodel_ok(ltr, l)) {
      std::printf("  [2] LtR %s: expected verified refutation\n", logic_name(l));
      return false;
    }
  }
  return true;
}

bool criterion3() {
  SearchResult r = run(Logic::PQFL, "forall x. (a = the y.(F(x,y)))", true);
  if (r.verdict != Verdict::Refuted || !r.model) return false;
  if (r.model->model.DE.size() != 1) return false;
  return countermodel_ok(r, Logic::PQFL);
}

bool criterion4() {
  for (Logic l : {Logic::PFL, Logic::PQFL, Logic::NQFL, Logic::NQFLminus})
    if (run(l, "b = b").verdict != Verdict::Proved) {
      std::printf("  [4] b=b not proved in %s\n", logic_name(l));
      return false;
    }
  SearchResult nfl = run(Logic::NFL, "b = b");
  if (nfl.verdict == Verdict::Proved) {
    std::printf("  [4] b=b unexpectedly proved in NFL\n");
    return false;
  }
  auto cex = oracle_validity(parse("b = b"), Logic::NFL, 2);
  if (!cex || eval_closed(cex->first, cex->second, parse("b = b"), Logic::NFL)) {
    std::printf("  [4] oracle found no bound-2 falsifier for b=b in NFL\n");
    return false;
  }
  if (run(Logic::NFL, "E!(b) -> b = b").verdict != Verdict::Proved) {
    std::printf("  [4] E!t -> t=t not proved in NFL\n");
    return false;
  }
  SearchResult iota = run(Logic::NQFL, "the x.(P(x)) = the x.(P(x))");
  if (iota.verdict != Verdict::Refuted || !countermodel_ok(iota, Logic::NQFL)) {
    std::printf("  [4] iota self-identity: expected verified NQFL refutation\n");
    return false;
  }
  return true;
}

bool criterion5() {
  for (Logic l : {Logic::PFL, Logic::NFL, Logic::PQFL, Logic::NQFL})
    if (run(l, "E!(a) <-> exists y. (y = a)").verdict != Verdict::Proved) {
      std::printf("  [5] existence definability not proved in %s\n", logic_name(l));
      return false;
    }
  return true;
}

bool criterion6() {
  for (Logic l : kAll)
    if (run(l, "(a = b) -> (b = a)").verdict != Verdict::Proved) {
      std::printf("  [6] symmetry not proved in %s\n", logic_name(l));
      return false;
    }
  return true;
}

bool criterion7() {
  testgen::Gen g(7);
  int verify_failures = 0, oracle_disagreements = 0;
  for (Logic l : kAll) {
    int done = 0;
    while (done < 50) {
      FormulaPtr f = g.closed_formula(3, l != Logic::NQFLminus);
      SearchResult r;
      Problem p;
      p.logic = l;
      p.goal = f;
      p.budget = 20000;
      try {
        r = search(p);
      } catch (const InternalError& e) {
        std::printf("  [7] %s: internal error on %s: %s\n", logic_name(l),
                    print(f).c_str(), e.what());
        ++verify_failures;
        ++done;
        continue;
      }
      ++done;
      if (r.verdict == Verdict::Refuted) {
        if (!countermodel_ok(r, l)) {
          std::printf("  [7] %s: verify_model failed on %s\n", logic_name(l),
                      print(f).c_str());
          ++verify_failures;
        }
      } else if (r.verdict == Verdict::Proved) {
        auto cex = oracle_validity(f, l, 3);
        if (cex) {
          std::printf("  [7] %s: proved but oracle falsifies %s\n", logic_name(l),
                      print(f).c_str());
          ++oracle_disagreements;
        }
      }
    }
  }
  return verify_failures == 0 && oracle_disagreements == 0;
}

bool criterion8() {
  auto t0 = std::chrono::steady_clock::now();
  int bad = 0;
  for (Logic l : kAll) {
    bool ne = l == Logic::PFL || l == Logic::NFL;
    for (Rule r : rules_for_logic(l, ne)) {
      SoundnessReport rep = oracle_rule_soundness(r, l, 200, 3, 2026);
      if (!rep.counterexamples.empty()) {
        std::printf("  [8] %s in %s: %zu counterexamples, e.g. %s\n", rule_name(r),
                    logic_name(l), rep.counterexamples.size(),
                    rep.counterexamples[0].c_str());
        ++bad;
      }
    }
  }
  double dt = seconds_since(t0);
  std::printf("  [8] sweep finished in %.1fs\n", dt);
  return bad == 0 && dt <= 600.0;
}

bool criterion9() {
  testgen::Gen g(9);
  int coin_checked = 0, coin_failed = 0;
  while (coin_checked < 1000) {
    Logic logic = kAll[static_cast<size_t>(g.pick(5))];
    FormulaPtr f = g.closed_formula(2, logic != Logic::NQFLminus);
    std::vector<TermPtr> dds = dd_subterms(std::vector<FormulaPtr>{f});
    Model m = g.model(1 + g.pick(3), dds);
    std::vector<Elem> codomain;
    if (is_quasi(logic)) codomain.assign(m.DE.begin(), m.DE.end());
    else codomain = m.D;
    if (codomain.empty()) continue;
    auto pick_elem = [&] {
      return codomain[static_cast<size_t>(g.pick(static_cast<int>(codomain.size())))];
    };
    Env v1{{"a", pick_elem()}, {"b", pick_elem()}};
    Env v2 = v1;
    v1["unused"] = codomain.front();
    v2["unused"] = codomain.back();
    if (eval_closed(m, v1, f, logic) != eval_closed(m, v2, f, logic)) ++coin_failed;
    ++coin_checked;
  }

  int sub_checked = 0, sub_failed = 0;
  while (sub_checked < 1000) {
    Logic logic = kAll[static_cast<size_t>(g.pick(5))];
    FormulaPtr phi;
    switch (g.pick(3)) {
      case 0: phi = mk_atom(g.pred(), {mk_bound("x")}); break;
      case 1: phi = mk_eq(mk_bound("x"), mk_param(g.param())); break;
      default:
        phi = mk_and(mk_atom(g.pred(), {mk_bound("x")}),
                     mk_not(mk_atom(g.pred(), {mk_bound("x")})));
        break;
    }
    TermPtr t = g.term();
    FormulaPtr substituted = alpha_normalize(substitute(phi, "x", t));
    std::vector<TermPtr> dds = dd_subterms(std::vector<FormulaPtr>{substituted});
    Model m = g.model(1 + g.pick(3), dds);
    std::vector<Elem> codomain;
    if (is_quasi(logic)) codomain.assign(m.DE.begin(), m.DE.end());
    else codomain = m.D;
    if (codomain.empty()) continue;
    auto pick_elem = [&] {
      return codomain[static_cast<size_t>(g.pick(static_cast<int>(codomain.size())))];
    };
    Env v{{"a", pick_elem()}, {"b", pick_elem()}};
    Elem den;
    try {
      Env env = v;
      den = interpret_term(m, env, t, logic);
    } catch (const EvalError&) {
      continue;  // improper description without an outer entry in this model
    }
    bool lhs = eval_closed(m, v, substituted, logic);
    Env vx = v;
    vx["x"] = den;
    if (lhs != eval_closed(m, vx, phi, logic)) ++sub_failed;
    ++sub_checked;
  }
  if (coin_failed || sub_failed)
    std::printf("  [9] coincidence failures=%d substitution failures=%d\n",
                coin_failed, sub_failed);
  return coin_failed == 0 && sub_failed == 0;
}

}  // namespace

int main() {
  struct Criterion {
    int n;
    const char* what;
    bool (*fn)();
  };
  const Criterion cs[] = {
      {1, "Lambert axiom proved in all five logics within limits", criterion1},
      {2, "Russellian discriminators: proofs and verified refutations", criterion2},
      {3, "sat example: open saturation with singleton DE, model verified", criterion3},
      {4, "per-logic identity profile with oracle falsifier", criterion4},
      {5, "existence definability proved in the E!-logics", criterion5},
      {6, "identity symmetry proved in all five logics", criterion6},
      {7, "random corpus: countermodels verified, proofs agree with oracle", criterion7},
      {8, "rule soundness sweep, zero counterexamples within time limit", criterion8},
      {9, "randomized Coincidence and Substitution lemmas", criterion9},
  };
  int failures = 0;
  for (const Criterion& c : cs) {
    bool ok = false;
    try {
      ok = c.fn();
    } catch (const std::exception& e) {
      std::printf("  [%d] unexpected exception: %s\n", c.n, e.what());
    }
    report(c.n, ok, c.what);
    if (!ok) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
