#pragma once

#include <cstdint>
#include <unordered_map>

#include "nestsim/lts.hpp"
#include "nestsim/syntax.hpp"
#include "nestsim/verdict.hpp"

namespace nestsim {

bool models(const Lts& l, StateId p, Formula f);
inline bool models(const Process& p, Formula f) { return models(p.lts, p.root, f); }

// Memoised checker for many queries over one shared LTS.
class ModelChecker {
 public:
  explicit ModelChecker(const Lts& l) : l_(l) {}
  bool check(StateId p, Formula f);

 private:
  const Lts& l_;
  std::unordered_map<std::uint64_t, bool> memo_;
};

// Countermodel is the witness of a failed entailment.
Verdict entails(Formula f1, Formula f2, const Alphabet& alphabet, SearchCaps caps = {});
Verdict logically_equiv(Formula f1, Formula f2, const Alphabet& alphabet, SearchCaps caps = {});

}  // namespace nestsim
