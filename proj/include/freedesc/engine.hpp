#pragma once

// Fair tableau proof search. Branches are expanded round-robin, one rule
// instance per visit, oldest-discovered instance first with closure rules
// prioritized and analytic rules preferred over cut/replacement rules. A
// branch with no pending instances is saturated; its extracted model is
// verified before being reported.

#include <cstdlib>
#include <deque>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <string>
#include <vector>

#include <json.hpp>

#include "freedesc/calculus.hpp"
#include "freedesc/countermodel.hpp"
#include "freedesc/logic.hpp"
#include "freedesc/oracle.hpp"
#include "freedesc/semantics.hpp"
#include "freedesc/syntax.hpp"

namespace freedesc {

struct InternalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Problem {
  Logic logic = Logic::PFL;
  FormulaPtr goal;           // desugared, closed
  bool satisfy = false;      // false: prove goal; true: test satisfiability of goal
  bool nonempty = false;     // PFL/NFL nonempty-domain variant
  long budget = 50000;       // rule instance applications
};

enum class Verdict { Proved, Refuted, Unknown };

struct ProofNode {
  int id = 0;
  std::vector<std::string> formulas_added;
  std::string rule;  // "root" or a rule name
  std::vector<int> premises;
  std::string closure;  // closure rule name on closed leaves
  std::vector<std::unique_ptr<ProofNode>> children;
  // replay metadata, not serialized
  std::string instance_id;
  std::string fresh_used;
};

struct SearchResult {
  Verdict verdict = Verdict::Unknown;
  std::unique_ptr<ProofNode> proof;
  std::optional<ExtractedModel> model;    // set when Refuted
  std::vector<std::string> open_branch;   // formula keys of the open branch
  long steps = 0;
  std::string note;
};

namespace detail {

struct BranchState {
  BranchView view;
  std::map<std::string, int> formula_node;  // formula key -> introducing node
  std::unordered_set<std::string> applied;  // instance ids already applied
  ProofNode* leaf = nullptr;
  long ticks = 0;  // applications on this branch, for the fairness interleave
};

inline int max_fresh_index(const std::vector<FormulaPtr>& fs) {
  int mx = 0;
  for (auto& p : params_of(fs))
    if (p.size() > 2 && p[0] == '_' && p[1] == 'k') {
      bool digits = true;
      for (size_t i = 2; i < p.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(p[i]))) { digits = false; break; }
      if (digits) mx = std::max(mx, std::stoi(p.substr(2)));
    }
  return mx;
}

}  // namespace detail

class Tableau {
 public:
  explicit Tableau(const Problem& p) : prob_(p) {}

  SearchResult run() {
    SearchResult res;
    if (!prob_.goal) throw std::invalid_argument("engine: missing goal");
    if (!formula_closed(prob_.goal)) throw std::invalid_argument("engine: goal must be closed");
    if (prob_.nonempty && is_quasi(prob_.logic))
      throw std::invalid_argument("engine: nonempty-domain variant applies to PFL/NFL only");

    FormulaPtr root_formula = prob_.satisfy
        ? alpha_normalize(prob_.goal)
        : alpha_normalize(mk_not(prob_.goal));
    std::vector<FormulaPtr> roots = {root_formula};

    // quasi-free logics with no parameters in the root: seed one denoting
    // parameter so the fair strategy stays complete over DE != {}; the
    // DE = {} case is decided separately when the seeded tableau closes.
    bool seeded = false;
    if (is_quasi(prob_.logic) && params_of(roots).empty()) {
      seeded = true;
      if (prob_.logic == Logic::NQFLminus)
        roots.push_back(mk_eq(mk_param("_k1"), mk_param("_k1")));
      else
        roots.push_back(mk_exists_pred(mk_param("_k1")));
    }

    FreshGen fresh;
    fresh.n = detail::max_fresh_index(roots);

    auto root = std::make_unique<ProofNode>();
    root->id = next_id_++;
    root->rule = "root";

    detail::BranchState init;
    init.leaf = root.get();
    for (auto& f : roots) {
      size_t before = init.view.formulas.size();
      init.view.add(f);
      if (init.view.formulas.size() > before) {
        root->formulas_added.push_back(init.view.keys.back());
        init.formula_node[init.view.keys.back()] = root->id;
      }
    }

    std::deque<detail::BranchState> queue;
    queue.push_back(std::move(init));
    std::unordered_map<std::string, long> seen_seq;  // instance id -> discovery order
    long seq = 0;

    res.proof = std::move(root);

    while (!queue.empty()) {
      detail::BranchState br = std::move(queue.front());
      queue.pop_front();

      std::vector<RuleInstance> insts =
          applicable_instances(br.view, prob_.logic, prob_.nonempty, &br.applied);
      for (auto& i : insts) seen_seq.emplace(i.id(), seq++);

      // pending instances on this branch, by priority then discovery order;
      // every sixth application ignores priorities and takes the oldest
      // pending instance instead, so no rule is starved by a self-sustaining
      // cycle of higher-priority rules (fairness)
      const bool fair_pick = br.ticks % 6 == 5;
      const RuleInstance* chosen = nullptr;
      long chosen_seq = 0;
      int chosen_pri = 0;
      for (auto& i : insts) {
        std::string id = i.id();
        if (br.applied.count(id)) continue;
        int pri = i.closes() ? 0
                             : fair_pick ? 1
                                         : (i.priority >= 0 ? i.priority
                                                            : rule_priority(i.rule));
        long sq = seen_seq.at(id);
        if (!chosen || pri < chosen_pri || (pri == chosen_pri && sq < chosen_seq)) {
          chosen = &i;
          chosen_pri = pri;
          chosen_seq = sq;
        }
      }

      if (!chosen) {  // saturated open branch
        ExtractedModel em = extract_model(br.view, prob_.logic);
        std::vector<std::string> errs = verify_model(em, br.view, prob_.logic);
        if (!errs.empty())
          throw InternalError("extracted model failed verification: " + errs.front());
        res.verdict = Verdict::Refuted;
        res.model = std::move(em);
        res.open_branch = br.view.keys;
        return res;
      }

      if (res.steps >= prob_.budget) {
        res.verdict = Verdict::Unknown;
        res.note = "budget of " + std::to_string(prob_.budget) + " steps exhausted";
        return res;
      }
      ++res.steps;
      ++br.ticks;

      static const bool trace = std::getenv("FREEDESC_TRACE") != nullptr;
      if (trace)
        std::cerr << res.steps << " [" << queue.size() + 1 << " branches] "
                  << chosen->id() << "\n";

      RuleInstance inst = *chosen;
      br.applied.insert(inst.id());

      // reuse one fresh parameter per instance id: the same instance applied on
      // a sibling branch introduces the same witness, which is still fresh
      // there because the parameter only ever enters via this instance
      std::string preset;
      if (inst.needs_fresh) {
        auto it = fresh_names_.find(inst.id());
        if (it != fresh_names_.end()) preset = it->second;
      }
      int fresh_before = fresh.n;
      std::vector<std::vector<FormulaPtr>> concls = apply_instance(inst, fresh, preset);
      if (inst.needs_fresh && preset.empty()) {
        preset = "_k" + std::to_string(fresh.n);
        fresh_names_[inst.id()] = preset;
      }

      std::vector<int> premise_ids;
      for (auto& pk : inst.premises) {
        auto it = br.formula_node.find(pk);
        if (it == br.formula_node.end())
          throw InternalError("premise not on branch: " + pk);
        premise_ids.push_back(it->second);
      }

      if (inst.closes()) {
        auto child = std::make_unique<ProofNode>();
        child->id = next_id_++;
        child->rule = rule_name(inst.rule);
        child->closure = rule_name(inst.rule);
        child->premises = premise_ids;
        child->instance_id = inst.id();
        br.leaf->children.push_back(std::move(child));
        continue;  // branch closed, dropped
      }

      (void)fresh_before;
      std::string fresh_name = inst.needs_fresh ? preset : "";

      std::vector<detail::BranchState> nexts;
      for (size_t c = 0; c < concls.size(); ++c) {
        detail::BranchState nb =
            (c + 1 == concls.size()) ? std::move(br) : br;
        auto child = std::make_unique<ProofNode>();
        child->id = next_id_++;
        child->rule = rule_name(inst.rule);
        child->premises = premise_ids;
        child->instance_id = inst.id();
        child->fresh_used = fresh_name;
        for (auto& f : concls[c]) {
          size_t before = nb.view.formulas.size();
          nb.view.add(f);
          if (nb.view.formulas.size() > before) {
            child->formulas_added.push_back(nb.view.keys.back());
            nb.formula_node[nb.view.keys.back()] = child->id;
          }
        }
        ProofNode* raw = child.get();
        nb.leaf->children.push_back(std::move(child));
        nb.leaf = raw;
        nexts.push_back(std::move(nb));
      }
      for (auto& nb : nexts) queue.push_back(std::move(nb));
    }

    // every branch closed
    if (seeded) {
      std::vector<FormulaPtr> base = {prob_.satisfy ? alpha_normalize(prob_.goal)
                                                    : alpha_normalize(mk_not(prob_.goal))};
      if (auto m = de_empty_satisfiable(base, prob_.logic)) {
        // goal (or its negation) holds in a model with DE = {}; report it
        if (!eval_closed(*m, {}, base[0], prob_.logic))
          throw InternalError("empty-DE model failed direct evaluation");
        ExtractedModel em;
        em.model = *m;
        em.extra = m->D.empty() ? 0 : m->D.back();
        res.verdict = Verdict::Refuted;
        res.model = std::move(em);
        for (auto& f : base) res.open_branch.push_back(key_of(f));
        res.note = "countermodel has an empty inner domain";
        return res;
      }
    }
    res.verdict = Verdict::Proved;
    return res;
  }

 private:
  Problem prob_;
  int next_id_ = 0;
  std::map<std::string, std::string> fresh_names_;  // instance id -> witness
};

inline SearchResult search(const Problem& p) { return Tableau(p).run(); }

// ---------------------------------------------------------------------------
// serialization

inline nlohmann::json proof_to_json(const ProofNode& n) {
  nlohmann::json j;
  j["id"] = n.id;
  j["formulas_added"] = n.formulas_added;
  j["rule"] = n.rule;
  j["premises"] = n.premises;
  if (!n.closure.empty()) j["closure"] = n.closure;
  nlohmann::json kids = nlohmann::json::array();
  for (auto& c : n.children) kids.push_back(proof_to_json(*c));
  j["children"] = std::move(kids);
  return j;
}

namespace detail {

inline std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

inline void proof_to_dot_rec(const ProofNode& n, std::ostringstream& os) {
  std::string label = n.rule;
  for (auto& f : n.formulas_added) label += "\\n" + detail::dot_escape(f);
  if (!n.closure.empty()) label += "\\n[closed]";
  os << "  n" << n.id << " [label=\"" << label << "\"";
  if (!n.closure.empty()) os << ", shape=box";
  os << "];\n";
  for (auto& c : n.children) {
    os << "  n" << n.id << " -> n" << c->id << ";\n";
    proof_to_dot_rec(*c, os);
  }
}

}  // namespace detail

inline std::string proof_to_dot(const ProofNode& n) {
  std::ostringstream os;
  os << "digraph tableau {\n  node [shape=ellipse, fontname=\"monospace\"];\n";
  detail::proof_to_dot_rec(n, os);
  os << "}\n";
  return os.str();
}

inline std::string proof_to_text(const ProofNode& n, int indent = 0) {
  std::string pad(static_cast<size_t>(indent) * 2, ' ');
  std::string out = pad + "[" + std::to_string(n.id) + "] " + n.rule;
  if (!n.premises.empty()) {
    out += " (from";
    for (int p : n.premises) out += " " + std::to_string(p);
    out += ")";
  }
  out += "\n";
  for (auto& f : n.formulas_added) out += pad + "    + " + f + "\n";
  if (!n.closure.empty()) out += pad + "    closed by " + n.closure + "\n";
  for (auto& c : n.children) out += proof_to_text(*c, indent + 1);
  return out;
}

}  // namespace freedesc
