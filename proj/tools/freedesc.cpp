// freedesc: tableau prover and finite-model tools for free logics with
// definite descriptions.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "freedesc/engine.hpp"
#include "freedesc/oracle.hpp"

namespace {

constexpr int kExitProved = 0;
constexpr int kExitRefuted = 1;
constexpr int kExitUnknown = 2;
constexpr int kExitUsage = 64;
constexpr int kExitParse = 65;
constexpr int kExitInternal = 70;

using nlohmann::json;
using namespace freedesc;

struct Options {
  std::string logic;
  std::string formula;
  std::string file;
  std::string format = "text";
  std::string model_path;
  long budget = 50000;
  int oracle_bound = 3;
  bool nonempty = false;
};

std::string read_input(const Options& o) {
  if (!o.file.empty()) {
    std::ifstream in(o.file);
    if (!in) throw std::runtime_error("cannot open file: " + o.file);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }
  return o.formula;
}

FormulaPtr parse_goal(const Options& o, Logic logic) {
  LanguageMode mode =
      logic == Logic::NQFLminus ? LanguageMode::Lminus : LanguageMode::L;
  return parse(read_input(o), mode);
}

json model_json(const Model& m, const Env& v) {
  json j = model_to_json(m);
  json jv = json::object();
  for (auto& [p, e] : v) jv[p] = e;
  j["v"] = jv;
  return j;
}

json extracted_json(const ExtractedModel& em) {
  json j = model_json(em.model, em.v);
  json reps = json::object();
  for (auto& [e, rep] : em.class_reps) reps[std::to_string(e)] = rep;
  j["class_reps"] = reps;
  return j;
}

std::string model_text(const Model& m, const Env& v) {
  std::ostringstream os;
  os << "D  = {";
  for (size_t i = 0; i < m.D.size(); ++i) os << (i ? ", " : "") << m.D[i];
  os << "}\nDE = {";
  bool first = true;
  for (Elem e : m.DE) { os << (first ? "" : ", ") << e; first = false; }
  os << "}\n";
  for (auto& [p, tuples] : m.I) {
    os << "I(" << p << ") = {";
    first = true;
    for (auto& t : tuples) {
      os << (first ? "" : ", ") << "(";
      for (size_t i = 0; i < t.size(); ++i) os << (i ? "," : "") << t[i];
      os << ")";
      first = false;
    }
    os << "}\n";
  }
  for (auto& oe : m.outer) {
    os << "outer(" << oe.descr;
    for (auto& [x, e] : oe.env) os << ", " << x << ":=" << e;
    os << ") = " << oe.val << "\n";
  }
  for (auto& [p, e] : v) os << "v(" << p << ") = " << e << "\n";
  return os.str();
}

int emit_search_result(const SearchResult& res, const Options& o, bool satisfy) {
  const char* proved_word = satisfy ? "UNSAT" : "Proved";
  const char* refuted_word = satisfy ? "SAT" : "Refuted";
  if (o.format == "json") {
    json j;
    j["verdict"] = res.verdict == Verdict::Proved
                       ? proved_word
                       : res.verdict == Verdict::Refuted ? refuted_word : "Unknown";
    j["steps"] = res.steps;
    if (!res.note.empty()) j["note"] = res.note;
    if (res.proof && res.verdict == Verdict::Proved) j["proof"] = proof_to_json(*res.proof);
    if (res.model) {
      j["model"] = extracted_json(*res.model);
      j["open_branch"] = res.open_branch;
    }
    std::cout << j.dump(2) << "\n";
  } else if (o.format == "dot") {
    if (res.proof) std::cout << proof_to_dot(*res.proof);
  } else {
    switch (res.verdict) {
      case Verdict::Proved:
        std::cout << proved_word << " (" << res.steps << " steps)\n";
        if (res.proof) std::cout << proof_to_text(*res.proof);
        break;
      case Verdict::Refuted:
        std::cout << refuted_word << " (" << res.steps << " steps)\n";
        if (!res.note.empty()) std::cout << res.note << "\n";
        std::cout << "open branch:\n";
        for (auto& f : res.open_branch) std::cout << "  " << f << "\n";
        std::cout << "countermodel:\n" << model_text(res.model->model, res.model->v);
        break;
      case Verdict::Unknown:
        std::cout << "Unknown";
        if (!res.note.empty()) std::cout << " (" << res.note << ")";
        std::cout << "\n";
        break;
    }
  }
  switch (res.verdict) {
    case Verdict::Proved: return kExitProved;
    case Verdict::Refuted: return kExitRefuted;
    default: return kExitUnknown;
  }
}

int cmd_prove(const Options& o, bool satisfy) {
  Logic logic = *logic_from_name(o.logic);
  Problem p;
  p.logic = logic;
  p.goal = parse_goal(o, logic);
  p.satisfy = satisfy;
  p.nonempty = o.nonempty;
  p.budget = o.budget;
  SearchResult res = search(p);
  return emit_search_result(res, o, satisfy);
}

int cmd_oracle(const Options& o) {
  Logic logic = *logic_from_name(o.logic);
  FormulaPtr goal = parse_goal(o, logic);
  auto cex = oracle_validity(goal, logic, o.oracle_bound);
  if (o.format == "json") {
    json j;
    j["bound"] = o.oracle_bound;
    j["verdict"] = cex ? "countermodel" : "valid-up-to-bound";
    if (cex) j["model"] = model_json(cex->first, cex->second);
    std::cout << j.dump(2) << "\n";
  } else {
    if (cex) {
      std::cout << "countermodel at bound " << o.oracle_bound << ":\n"
                << model_text(cex->first, cex->second);
    } else {
      std::cout << "valid up to bound " << o.oracle_bound << "\n";
    }
  }
  return cex ? kExitRefuted : kExitProved;
}

int cmd_check_model(const Options& o) {
  Logic logic = *logic_from_name(o.logic);
  FormulaPtr goal = parse_goal(o, logic);
  std::ifstream in(o.model_path);
  if (!in) throw std::runtime_error("cannot open model file: " + o.model_path);
  json j = json::parse(in);
  Model m = model_from_json(j);
  Env v;
  if (j.contains("v"))
    for (auto& [p, e] : j["v"].items()) v[p] = e.get<Elem>();
  std::vector<std::string> errs = check_model_wellformed(m, logic, {goal}, v);
  bool sat = false;
  if (errs.empty()) {
    try {
      sat = eval_closed(m, v, goal, logic);
    } catch (const EvalError& e) {
      errs.push_back(e.what());
    }
  }
  if (o.format == "json") {
    json out;
    out["wellformed"] = errs.empty();
    out["diagnostics"] = errs;
    if (errs.empty()) out["satisfied"] = sat;
    std::cout << out.dump(2) << "\n";
  } else {
    for (auto& e : errs) std::cout << "violation: " << e << "\n";
    if (errs.empty())
      std::cout << (sat ? "model satisfies the formula\n"
                        : "model falsifies the formula\n");
  }
  if (!errs.empty()) return kExitUnknown;
  return sat ? kExitProved : kExitRefuted;
}

void add_common(CLI::App* cmd, Options& o, bool with_budget, bool with_bound) {
  cmd->add_option("--logic", o.logic, "logic: pfl, nfl, pqfl, nqfl, nqflm")
      ->required()
      ->check(CLI::IsMember({"pfl", "nfl", "pqfl", "nqfl", "nqflm"}));
  cmd->add_option("formula", o.formula, "formula (inline)");
  cmd->add_option("--file", o.file, "read the formula from a file");
  cmd->add_option("--format", o.format, "output format")
      ->check(CLI::IsMember({"text", "json", "dot"}));
  if (with_budget) {
    cmd->add_option("--budget", o.budget, "step budget")->check(CLI::PositiveNumber);
    cmd->add_flag("--nonempty", o.nonempty, "nonempty-domain variant (PFL/NFL)");
  }
  if (with_bound)
    cmd->add_option("--oracle-bound", o.oracle_bound, "max domain size")
        ->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tableau prover for free logics with definite descriptions"};
  app.require_subcommand(1);

  Options oprove, osat, ooracle, ocheck;
  CLI::App* prove = app.add_subcommand("prove", "prove validity of a formula");
  add_common(prove, oprove, true, false);
  CLI::App* sat = app.add_subcommand("sat", "test satisfiability of a formula");
  add_common(sat, osat, true, false);
  CLI::App* oracle =
      app.add_subcommand("oracle", "brute-force validity check up to a domain bound");
  add_common(oracle, ooracle, false, true);
  CLI::App* check = app.add_subcommand("check-model", "verify a model JSON against a formula");
  add_common(check, ocheck, false, false);
  check->add_option("--model", ocheck.model_path, "model JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (prove->parsed()) {
      if (oprove.formula.empty() && oprove.file.empty()) throw CLI::RequiredError("formula");
      if (oprove.nonempty && is_quasi(*logic_from_name(oprove.logic)))
        throw CLI::ValidationError("--nonempty applies to pfl and nfl only");
      return cmd_prove(oprove, false);
    }
    if (sat->parsed()) {
      if (osat.formula.empty() && osat.file.empty()) throw CLI::RequiredError("formula");
      if (osat.nonempty && is_quasi(*logic_from_name(osat.logic)))
        throw CLI::ValidationError("--nonempty applies to pfl and nfl only");
      return cmd_prove(osat, true);
    }
    if (oracle->parsed()) {
      if (ooracle.formula.empty() && ooracle.file.empty())
        throw CLI::RequiredError("formula");
      return cmd_oracle(ooracle);
    }
    if (check->parsed()) {
      if (ocheck.formula.empty() && ocheck.file.empty()) throw CLI::RequiredError("formula");
      return cmd_check_model(ocheck);
    }
    return kExitUsage;
  } catch (const CLI::Error& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const InternalError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}
