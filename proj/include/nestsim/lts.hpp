#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nestsim/syntax.hpp"

namespace nestsim {

struct StateId {
  std::uint32_t index = 0;

  friend bool operator==(StateId x, StateId y) { return x.index == y.index; }
  friend bool operator!=(StateId x, StateId y) { return x.index != y.index; }
  friend bool operator<(StateId x, StateId y) { return x.index < y.index; }
};

struct Edge {
  Action action;
  StateId target;
};

struct Transition {
  StateId source;
  Action action;
  StateId target;
};

class CycleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FormatError : public std::runtime_error {
 public:
  FormatError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class Lts {
 public:
  Lts() = default;
  explicit Lts(Alphabet alphabet) : alphabet_(std::move(alphabet)) {}

  StateId add_state(std::string name = {});
  // Duplicate transitions are ignored. The label must be in the alphabet.
  void add_transition(StateId source, Action a, StateId target);

  const Alphabet& alphabet() const { return alphabet_; }
  void extend_alphabet(const Alphabet& more) { alphabet_ = alphabet_.merged(more); }

  std::size_t num_states() const { return out_.size(); }
  std::size_t num_transitions() const;
  bool has_state(StateId s) const { return s.index < out_.size(); }
  // Outgoing edges sorted by (action id, target).
  const std::vector<Edge>& edges(StateId s) const { return out_.at(s.index); }
  std::vector<StateId> successors(StateId s, Action a) const;
  std::vector<Transition> transitions() const;
  const std::string& name(StateId s) const { return names_.at(s.index); }
  std::vector<StateId> states() const;

 private:
  Alphabet alphabet_;
  std::vector<std::vector<Edge>> out_;
  std::vector<std::string> names_;
};

struct Process {
  Lts lts;
  StateId root;
};

// Identical subterms map to one state; sums get a state only when they are
// the root or the target of a prefix. The alphabet defaults to the actions
// occurring in t.
Process term_to_lts(const ProcessTerm& t);
Process term_to_lts(const ProcessTerm& t, const Alphabet& alphabet);
Process parse_process_lts(std::string_view text, const Alphabet& alphabet);

std::vector<StateId> reach(const Lts& l, StateId p);
int depth(const Lts& l, StateId p);
std::size_t process_size(const Lts& l, StateId p);
bool validate_loop_free(const Lts& l);

Process sum(const Lts& l, StateId p, StateId q);
// Copies l2 after l1; states of l2 are shifted by l1.num_states().
Lts disjoint_union(const Lts& l1, const Lts& l2);
inline StateId shifted(const Lts& l1, StateId s) {
  return StateId{static_cast<std::uint32_t>(s.index + l1.num_states())};
}
// Reachable part of p, renumbered with the root at 0.
Process restrict_to(const Lts& l, StateId p);

// Canonical term for the bisimilarity class of a loop-free process:
// summands deduplicated and sorted. Equal strings iff bisimilar.
std::string canonical_term(const Lts& l, StateId p);

std::string format_aut(const Lts& l, StateId root);
Process parse_aut(std::string_view text);
Process read_aut(const std::filesystem::path& path);
void write_aut(const Lts& l, StateId root, const std::filesystem::path& path);

}  // namespace nestsim
