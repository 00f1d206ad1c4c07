#pragma once

#include <cstdint>
#include <unordered_map>
#include <utility>
#include <vector>

#include "nestsim/lts.hpp"

namespace nestsim {

enum class RelationKind { Sim, NSim, Bisim, Kernel };

class RelationTable {
 public:
  RelationTable(RelationKind kind, int level, const Lts& l);

  RelationKind kind() const { return kind_; }
  // n for NSim(n) and Kernel(n); 1 for Sim; 0 for Bisim.
  int level() const { return level_; }
  std::size_t num_states() const { return n_; }
  std::uint64_t over() const { return fingerprint_; }

  bool contains(StateId p, StateId q) const { return bits_[p.index * n_ + q.index]; }
  void set(StateId p, StateId q, bool v) { bits_[p.index * n_ + q.index] = v; }
  std::size_t count() const;
  std::vector<std::pair<StateId, StateId>> pairs() const;

 private:
  RelationKind kind_;
  int level_;
  std::size_t n_;
  std::uint64_t fingerprint_;
  std::vector<bool> bits_;
};

std::uint64_t fingerprint(const Lts& l);

RelationTable simulation(const Lts& l);
RelationTable nsim(const Lts& l, int n);
RelationTable bisim(const Lts& l);
RelationTable kernel(const Lts& l, int n);

// Memoised on-demand nested simulation for large shared LTSs where full
// tables would be quadratic. Level 0 is the universal relation.
class LazyNsim {
 public:
  explicit LazyNsim(const Lts& l) : l_(l) {}

  bool le(int n, StateId p, StateId q);
  bool equiv(int n, StateId p, StateId q) { return le(n, p, q) && le(n, q, p); }
  std::size_t memo_size() const { return memo_.size(); }

 private:
  const Lts& l_;
  std::unordered_map<std::uint64_t, bool> memo_;
};

// Cross-LTS queries via the disjoint union.
bool nsim_holds(const Process& p, const Process& q, int n);
bool kernel_holds(const Process& p, const Process& q, int n);
bool bisimilar(const Process& p, const Process& q);

}  // namespace nestsim
