#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace freedesc {

// The five free logics with definite descriptions supported by the prover.
enum class Logic { PFL, NFL, PQFL, NQFL, NQFLminus };

// Negative logics: predicates and identity are strict (false unless all
// arguments denote existing objects).
inline bool is_negative(Logic l) {
  return l == Logic::NFL || l == Logic::NQFL || l == Logic::NQFLminus;
}

// Quasi-free logics: parameters always denote existing objects.
inline bool is_quasi(Logic l) {
  return l == Logic::PQFL || l == Logic::NQFL || l == Logic::NQFLminus;
}

inline const char* logic_name(Logic l) {
  switch (l) {
    case Logic::PFL: return "pfl";
    case Logic::NFL: return "nfl";
    case Logic::PQFL: return "pqfl";
    case Logic::NQFL: return "nqfl";
    case Logic::NQFLminus: return "nqflm";
  }
  return "?";
}

inline std::optional<Logic> logic_from_name(std::string_view s) {
  if (s == "pfl") return Logic::PFL;
  if (s == "nfl") return Logic::NFL;
  if (s == "pqfl") return Logic::PQFL;
  if (s == "nqfl") return Logic::NQFL;
  if (s == "nqflm") return Logic::NQFLminus;
  return std::nullopt;
}

}  // namespace freedesc
