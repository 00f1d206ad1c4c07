#pragma once

#include <initializer_list>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "nestsim/lts.hpp"
#include "nestsim/syntax.hpp"
#include "nestsim/verdict.hpp"

namespace nestsim {

// Sorted, duplicate-free set of formulae.
class LabelSet {
 public:
  LabelSet() = default;
  explicit LabelSet(std::vector<Formula> fs);
  LabelSet(std::initializer_list<Formula> fs) : LabelSet(std::vector<Formula>(fs)) {}

  bool contains(Formula f) const;
  LabelSet with(Formula f) const;
  LabelSet merged(const LabelSet& other) const;
  bool subset_of(const LabelSet& other) const;

  std::size_t size() const { return fs_.size(); }
  bool empty() const { return fs_.empty(); }
  auto begin() const { return fs_.begin(); }
  auto end() const { return fs_.end(); }
  const std::vector<Formula>& formulas() const { return fs_; }
  std::size_t hash() const;
  std::string to_string() const;

  friend bool operator==(const LabelSet& x, const LabelSet& y) { return x.fs_ == y.fs_; }
  friend bool operator!=(const LabelSet& x, const LabelSet& y) { return x.fs_ != y.fs_; }
  friend bool operator<(const LabelSet& x, const LabelSet& y) { return x.fs_ < y.fs_; }

 private:
  std::vector<Formula> fs_;
};

struct LabelSetHash {
  std::size_t operator()(const LabelSet& s) const noexcept { return s.hash(); }
};

// tt, ff, <a>x, [a]x, !<a>x and ![a]x.
bool is_elementary(Formula f);
enum class PropShape { Elementary, Conjunctive, Disjunctive };
// Propositional parts of f, with negation pushed one level: !(x&y) is
// disjunctive, !(x|y) conjunctive, !!x, !tt and !ff conjunctive on one part.
PropShape prop_shape(Formula f, Formula& x, Formula& y);

// No ff and no complementary pair.
bool propositionally_consistent(const LabelSet& s);

struct DiamondDemand {
  Action action;
  Formula body;    // x for <a>x, !x for ![a]x
  Formula source;  // the formula in the label
};

// Demands of a closed label in label order.
std::vector<DiamondDemand> diamond_demands(const LabelSet& closed);
// {x : [a]x in L} together with {!x : !<a>x in L}.
LabelSet box_successor(const LabelSet& closed, Action a);

// The closed label together with every formula of the initial set that it
// makes true, and their true parts: a propositional tableau in full.
LabelSet saturate(const LabelSet& initial, const LabelSet& closed);

struct HmlTableau {
  std::vector<LabelSet> label;
  std::vector<std::vector<Edge>> rel;
  std::uint32_t root = 0;
};

// Checks the propositional, box-propagation and diamond-witness conditions.
bool is_hml_tableau(const HmlTableau& t);
// State per tableau node, transitions from rel.
Process tableau_to_lts(const HmlTableau& t, const Alphabet& alphabet);

// Satisfiability engine. Memo tables live as long as the object.
class Tableau {
 public:
  explicit Tableau(SearchCaps caps = {}) : caps_(caps) {}

  // Consistent propositional closures, deduplicated, in a fixed order.
  const std::vector<LabelSet>& closures(const LabelSet& s);
  bool satisfiable(const LabelSet& s);
  bool satisfiable(Formula f) { return satisfiable(LabelSet{f}); }
  bool closure_satisfiable(const LabelSet& closed);
  // Closures whose diamond demands are all satisfiable.
  std::vector<LabelSet> satisfiable_closures(const LabelSet& s);
  std::optional<HmlTableau> build(const LabelSet& s);

  const Stats& stats() const { return stats_; }
  Stats& stats() { return stats_; }

 private:
  void charge();
  int build_rec(const LabelSet& s, HmlTableau& t);

  SearchCaps caps_;
  Stats stats_;
  std::unordered_map<LabelSet, std::vector<LabelSet>, LabelSetHash> closures_;
  std::unordered_map<LabelSet, bool, LabelSetHash> sat_;
  std::unordered_map<LabelSet, bool, LabelSetHash> closed_sat_;
};

std::vector<LabelSet> propositional_closures(const LabelSet& t);

// Polynomial check for formulae built from tt, ff, &, | and <a>.
std::optional<Process> sat_pure_diamond(Formula f, const Alphabet& alphabet);

// Witness is a tree model of depth at most md(f).
Verdict sat(Formula f, const Alphabet& alphabet, SearchCaps caps = {});

}  // namespace nestsim
