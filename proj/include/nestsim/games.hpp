#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "nestsim/lts.hpp"
#include "nestsim/syntax.hpp"
#include "nestsim/tableau.hpp"
#include "nestsim/verdict.hpp"

namespace nestsim {

// Labelled tree grown by the basic moves. Removed nodes keep their slot.
struct LabeledTree {
  struct Node {
    std::string id;  // path from the root, e.g. r.a#0 or r.b#box
    LabelSet initial;
    LabelSet label;
    // Set once no formula of the label can be replaced.
    std::optional<LabelSet> final_label;
    std::optional<std::uint32_t> parent;
    bool removed = false;
  };

  explicit LabeledTree(LabelSet initial);

  const Node& node(std::uint32_t s) const;
  // Live successors along a.
  std::vector<std::uint32_t> successors(std::uint32_t s, Action a) const;
  std::size_t size() const { return nodes.size(); }

  std::vector<Node> nodes;
  std::vector<std::vector<Edge>> rel;
  std::uint32_t root = 0;
};

// Conjunctive formulae of the current label, then disjunctive ones.
std::vector<Formula> pending_conjunctions(const LabeledTree& t, std::uint32_t s);
std::vector<Formula> pending_disjunctions(const LabeledTree& t, std::uint32_t s);

void move_and(LabeledTree& t, std::uint32_t s);
// One choice per pending disjunction, in label order; true keeps the left part.
void move_or(LabeledTree& t, std::uint32_t s, const std::vector<bool>& take_left);
// One successor per diamond demand of a final label; returns the new nodes.
std::vector<std::uint32_t> move_diamond(LabeledTree& t, std::uint32_t s);
std::optional<std::uint32_t> move_box(LabeledTree& t, std::uint32_t s, std::optional<Action> choice);
// added must be a subset of the subformulae of phi.
void move_sub(LabeledTree& t, std::uint32_t s, const LabelSet& added, Formula phi);
// Removes, per action, successors whose label is contained in a remaining
// sibling's label; of equal labels the first is kept. Returns removed nodes.
std::vector<std::uint32_t> move_rem(LabeledTree& t, std::uint32_t s);

// Formulae that can appear in any label of a game started on `roots`.
LabelSet game_formula_closure(const std::vector<Formula>& roots);

// Alternating search for the char-n-se and prime-n-sp games. Memo tables are
// shared between calls on the same object.
class GameSolver {
 public:
  explicit GameSolver(Alphabet alphabet, SearchCaps caps = {});
  ~GameSolver();

  // A wins Sim^n(U1, U2).
  bool sim(int n, const LabelSet& u1, const LabelSet& u2);
  // A wins prime-n-sp on a satisfiable phi; n >= 3.
  bool primensp(int n, Formula phi);

  // One play consistent with the winner's strategy.
  std::vector<std::string> explain_sim(int n, const LabelSet& u1, const LabelSet& u2);
  std::vector<std::string> explain_primensp(int n, Formula phi);

  Stats stats() const;
  Tableau& tableau() { return tab_; }

 private:
  struct Prime;
  struct SimKey {
    int n;
    LabelSet a, b;
    friend bool operator==(const SimKey& x, const SimKey& y) { return x.n == y.n && x.a == y.a && x.b == y.b; }
  };
  struct SimKeyHash {
    std::size_t operator()(const SimKey& k) const noexcept;
  };

  void charge();
  void add_roots(const std::vector<Formula>& roots);
  bool sim_rec(int n, const LabelSet& u1, const LabelSet& u2);
  void check_label(const LabelSet& l);
  const std::vector<LabelSet>& sat_closures(const LabelSet& l);

  bool sim_round(int n, const LabelSet& c1, const LabelSet& c2, int round, int bound);
  bool good_pair(int n, const LabelSet& x, const LabelSet& y);

  const std::vector<LabelSet>& a_options(Prime& p, const LabelSet& base);
  bool pwin(Prime& p, int round, const LabelSet& p1, const LabelSet& p2, const LabelSet& q);
  bool pround(Prime& p, int round, Action a, const LabelSet& p1, const LabelSet& p2, const LabelSet& q);
  bool a_answers(Prime& p, int round, const std::vector<LabelSet>& q_bases, const std::vector<LabelSet>& xs,
                 const std::vector<LabelSet>& ys, std::vector<LabelSet>* choice);
  bool answerable(Prime& p, int round, const LabelSet& z, const std::vector<LabelSet>& xs,
                  const std::vector<LabelSet>& ys, std::pair<LabelSet, LabelSet>* reply);
  Prime& prime_context(int n, Formula phi);

  void explain_sim_entry(int n, const LabelSet& u1, const LabelSet& u2, std::vector<std::string>& out);
  void explain_sim_round(int n, const LabelSet& c1, const LabelSet& c2, int round, int bound,
                         const std::string& id1, const std::string& id2, std::vector<std::string>& out);
  void explain_prime_round(Prime& p, int round, const LabelSet& p1, const LabelSet& p2, const LabelSet& q,
                           const std::string& id1, const std::string& id2, const std::string& idq,
                           std::vector<std::string>& out);

  Alphabet alphabet_;
  SearchCaps caps_;
  Stats stats_;
  Tableau tab_;
  std::optional<LabelSet> universe_;
  std::unordered_map<LabelSet, std::vector<LabelSet>, LabelSetHash> sat_closures_;
  std::unordered_map<SimKey, bool, SimKeyHash> sim_entry_;
  std::unordered_map<SimKey, bool, SimKeyHash> sim_round_;
  std::vector<std::unique_ptr<Prime>> primes_;
};

struct GameOptions {
  SearchCaps caps;
  bool trace = false;
};

Verdict a_wins_sim(int n, const LabelSet& u1, const LabelSet& u2, const Alphabet& alphabet, GameOptions opts = {});
Verdict a_wins_primensp(int n, Formula phi, const Alphabet& alphabet, GameOptions opts = {});

// sat(phi) and A wins Sim^n({phi}, {phi}).
Verdict decide_characteristic_modulo(int n, Formula phi, const Alphabet& alphabet, GameOptions opts = {});
// n >= 3, phi in L_nS.
Verdict decide_characteristic_within(int n, Formula phi, const Alphabet& alphabet, GameOptions opts = {});
Verdict decide_prime(int n, Formula phi, const Alphabet& alphabet, GameOptions opts = {});

}  // namespace nestsim
