#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nestsim/lts.hpp"
#include "nestsim/syntax.hpp"
#include "nestsim/verdict.hpp"

namespace nestsim {

struct UniverseBounds {
  Alphabet alphabet;
  int depth = 0;
  // Maximum successors per state per action.
  int width = 1;
  // Maximum number of edges of the unfolded tree; unbounded when empty.
  std::optional<std::size_t> max_edges;
  // Enumeration stops here and the universe is marked truncated.
  std::size_t max_processes = 500000;

  std::string describe() const;
};

// One state per bisimilarity class within bounds, all in one shared LTS.
// States are listed in canonical order: by depth, then generation order.
class Universe {
 public:
  explicit Universe(const UniverseBounds& b);

  const Lts& lts() const { return lts_; }
  const std::vector<StateId>& members() const { return members_; }
  const UniverseBounds& bounds() const { return bounds_; }
  bool truncated() const { return truncated_; }

 private:
  UniverseBounds bounds_;
  Lts lts_;
  std::vector<StateId> members_;
  bool truncated_ = false;
};

// Shared instance per bounds; safe to call from several threads.
std::shared_ptr<const Universe> universe_for(const UniverseBounds& b);

std::vector<Process> enum_processes(const UniverseBounds& b);
std::vector<Process> brute_models(Formula f, const UniverseBounds& b);

// depth md(f)+1, width = modal subformulae + 1, and an edge cap that keeps
// the universe enumerable.
UniverseBounds default_bounds(Formula f, const Alphabet& alphabet);

// Notes on returned verdicts: "certified" for negative answers with depth at
// least md(f)+1, "within bounds: ..." for positive ones. A truncated universe
// gives complete = false.
Verdict brute_characteristic_modulo(int n, Formula f, const UniverseBounds& b);
Verdict brute_characteristic_within(int n, Formula f, const UniverseBounds& b);
Verdict brute_prime(int n, Formula f, const UniverseBounds& b);

bool is_certified(const Verdict& v);

}  // namespace nestsim
