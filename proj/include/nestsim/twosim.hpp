#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nestsim/lts.hpp"
#include "nestsim/syntax.hpp"
#include "nestsim/tableau.hpp"
#include "nestsim/verdict.hpp"

namespace nestsim {

// A script that does not fit the run it drives.
class ScriptError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Pick { Left, Right };

struct BoxPhase {
  int n = 0;
  std::vector<Action> picks;  // one action per box child; size n
};

// Choices for one ConPro run. Disjunct picks are consumed in resolution order
// across the whole run; there is one box phase entry per dequeued state, with
// nullopt for skipping the box block.
struct ChoiceScript {
  std::vector<Pick> disjunct_picks;
  std::vector<std::optional<BoxPhase>> box_phases;
};

struct ConProRun {
  bool stopped = false;
  std::string stop_reason;
  // States are named s0, s1, ... in creation order; s0 is the root.
  Lts lts;
  StateId root;
  std::vector<int> depth;
  // Saturated label for processed states, creation label otherwise.
  std::vector<LabelSet> label;
  int box_count = 0;

  Process process() const { return {lts, root}; }
};

// Replays ConPro on the negation normal form of phi. Requires phi in L_2S.
ConProRun conpro_run(Formula phi, const ChoiceScript& script, const Alphabet& alphabet);

struct ConProOutput {
  Process process;
  ChoiceScript script;  // replays to a bisimilar output
  int box_count = 0;
};

struct TwoSimOptions {
  SearchCaps caps;  // max_nodes, when set, overrides max_partials
  std::uint64_t max_partials = 2'000'000;
  std::size_t max_outputs = 20000;
  // Box children allowed per run; defaults to, and is capped at, |phi|.
  std::optional<int> box_budget;
  unsigned threads = 1;
};

struct ConProEnumeration {
  // Pairwise non-bisimilar, smallest first. Empty iff every run stops.
  std::vector<ConProOutput> outputs;
  bool complete = true;
  std::uint64_t partials = 0;
};

ConProEnumeration conpro_enumerate(Formula phi, const Alphabet& alphabet, TwoSimOptions opts = {});

// Maximal lower bound of p1 and p2 for the 2-nested simulation preorder;
// empty iff p1 and p2 are not simulation equivalent. l must be loop-free.
std::optional<Process> mlb_2s(const Lts& l, StateId p1, StateId p2);

Verdict prime_2s(Formula phi, const Alphabet& alphabet, TwoSimOptions opts = {});

enum class CharMode { Within, Modulo };
Verdict characteristic_2s(Formula phi, CharMode mode, const Alphabet& alphabet, TwoSimOptions opts = {});

}  // namespace nestsim
