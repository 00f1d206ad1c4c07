#pragma once

#include <random>
#include <vector>

#include "nestsim/lts.hpp"
#include "nestsim/syntax.hpp"

namespace nestsim::testing {

struct FormulaShape {
  int max_md = 2;
  std::size_t max_size = 10;
  bool diamonds_only = false;
  bool allow_box = true;
  bool allow_not = true;
};

// Uniform-ish recursive generator; the size budget is split between
// operands, so results never exceed max_size.
class FormulaGen {
 public:
  FormulaGen(std::uint64_t seed, Alphabet alphabet) : rng_(seed), alphabet_(std::move(alphabet)) {}

  Formula any(const FormulaShape& shape) { return gen(shape, shape.max_md, shape.max_size); }

  // Rejection sampling on the fragment level.
  Formula in_fragment(const FormulaShape& shape, int level) {
    for (;;) {
      Formula f = any(shape);
      if (fragment_level(f).level <= level) return f;
    }
  }

  std::mt19937_64& rng() { return rng_; }

 private:
  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }

  Formula gen(const FormulaShape& s, int depth, std::size_t budget) {
    if (budget <= 1) return pick(4) == 0 ? Formula::ff() : Formula::tt();
    std::vector<int> choices{0, 1, 2};  // atom, and, or
    if (budget >= 3) {
      choices.push_back(1);
      choices.push_back(2);
    } else {
      choices.erase(choices.begin() + 1, choices.end());
    }
    if (depth > 0) {
      choices.push_back(3);
      choices.push_back(3);
      if (s.allow_box && !s.diamonds_only) choices.push_back(4);
    }
    if (s.allow_not && !s.diamonds_only) choices.push_back(5);
    switch (choices[pick(static_cast<int>(choices.size()))]) {
      case 0:
        return pick(4) == 0 ? Formula::ff() : Formula::tt();
      case 1:
      case 2: {
        std::size_t left = 1 + pick(static_cast<int>(budget - 2));
        Formula x = gen(s, depth, left);
        Formula y = gen(s, depth, budget - 1 - left);
        return pick(2) ? Formula::conj(x, y) : Formula::disj(x, y);
      }
      case 3:
        return Formula::diamond(action(), gen(s, depth - 1, budget - 1));
      case 4:
        return Formula::box(action(), gen(s, depth - 1, budget - 1));
      default:
        return Formula::negate(gen(s, depth, budget - 1));
    }
  }

  Action action() { return alphabet_[pick(static_cast<int>(alphabet_.size()))]; }

  std::mt19937_64 rng_;
  Alphabet alphabet_;
};

class ProcessGen {
 public:
  ProcessGen(std::uint64_t seed, Alphabet alphabet) : rng_(seed), alphabet_(std::move(alphabet)) {}

  // Random tree term of depth at most max_depth with at most max_branch
  // summands per node.
  ProcessTerm term(int max_depth, int max_branch) {
    if (max_depth == 0) return ProcessTerm::nil();
    int n = std::uniform_int_distribution<int>(0, max_branch)(rng_);
    if (n == 0) return ProcessTerm::nil();
    ProcessTerm acc;
    for (int i = 0; i < n; ++i) {
      Action a = alphabet_[std::uniform_int_distribution<int>(0, static_cast<int>(alphabet_.size()) - 1)(rng_)];
      ProcessTerm t = ProcessTerm::prefix(a, term(max_depth - 1, max_branch));
      acc = i == 0 ? t : ProcessTerm::sum(acc, t);
    }
    return acc;
  }

  Process process(int max_depth, int max_branch) { return term_to_lts(term(max_depth, max_branch), alphabet_); }

  std::mt19937_64& rng() { return rng_; }

 private:
  std::mt19937_64 rng_;
  Alphabet alphabet_;
};

// Characteristic formula of a loop-free process modulo bisimilarity: a
// diamond per transition and a box per action over the successors.
inline Formula bisim_formula(const Lts& l, StateId s) {
  std::vector<Formula> parts;
  for (std::size_t i = 0; i < l.alphabet().size(); ++i) {
    Action a = l.alphabet()[i];
    std::vector<Formula> succ;
    for (StateId t : l.successors(s, a)) {
      Formula c = bisim_formula(l, t);
      parts.push_back(Formula::diamond(a, c));
      succ.push_back(c);
    }
    parts.push_back(Formula::box(a, succ.empty() ? Formula::ff() : disj_all(succ)));
  }
  return conj_all(parts);
}

// Box-only formula satisfied exactly by the processes simulated by s.
inline Formula sim_below_formula(const Lts& l, StateId s) {
  std::vector<Formula> parts;
  for (std::size_t i = 0; i < l.alphabet().size(); ++i) {
    Action a = l.alphabet()[i];
    std::vector<Formula> succ;
    for (StateId t : l.successors(s, a)) succ.push_back(sim_below_formula(l, t));
    parts.push_back(Formula::box(a, succ.empty() ? Formula::ff() : disj_all(succ)));
  }
  return conj_all(parts);
}

// Characteristic formula of s within L_2S: q satisfies it iff s is 2-nested
// simulated by q.
inline Formula sim2_formula(const Lts& l, StateId s) {
  std::vector<Formula> parts;
  for (const Edge& e : l.edges(s)) parts.push_back(Formula::diamond(e.action, sim2_formula(l, e.target)));
  parts.push_back(sim_below_formula(l, s));
  return conj_all(parts);
}

// f itself followed by f with each top-level conjunct dropped in turn.
inline std::vector<Formula> weakenings(Formula f) {
  std::vector<Formula> parts, todo{f};
  while (!todo.empty()) {
    Formula g = todo.back();
    todo.pop_back();
    if (g.is(Op::And)) {
      todo.push_back(g.rhs());
      todo.push_back(g.lhs());
    } else {
      parts.push_back(g);
    }
  }
  std::vector<Formula> out{f};
  for (std::size_t k = 0; k < parts.size() && parts.size() > 1; ++k) {
    auto rest = parts;
    rest.erase(rest.begin() + static_cast<long>(k));
    out.push_back(conj_all(rest));
  }
  return out;
}

inline Alphabet ab() { return Alphabet::from_names({"a", "b"}); }

}  // namespace nestsim::testing
