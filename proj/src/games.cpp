#include "nestsim/games.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace nestsim {

LabeledTree::LabeledTree(LabelSet initial) {
  Node n;
  n.id = "r";
  n.initial = initial;
  n.label = std::move(initial);
  nodes.push_back(std::move(n));
  rel.emplace_back();
}

const LabeledTree::Node& LabeledTree::node(std::uint32_t s) const {
  if (s >= nodes.size() || nodes[s].removed) throw PreconditionError("unknown state " + std::to_string(s));
  return nodes[s];
}

std::vector<std::uint32_t> LabeledTree::successors(std::uint32_t s, Action a) const {
  node(s);
  std::vector<std::uint32_t> out;
  for (const Edge& e : rel[s]) {
    if (e.action == a && !nodes[e.target.index].removed) out.push_back(e.target.index);
  }
  return out;
}

namespace {

LabeledTree::Node& live(LabeledTree& t, std::uint32_t s) {
  t.node(s);
  return t.nodes[s];
}

std::vector<Formula> pending(const LabelSet& l, PropShape want) {
  std::vector<Formula> out;
  for (Formula f : l) {
    Formula x, y;
    if (prop_shape(f, x, y) == want) out.push_back(f);
  }
  return out;
}

void finish(LabeledTree::Node& n) {
  if (pending(n.label, PropShape::Conjunctive).empty() && pending(n.label, PropShape::Disjunctive).empty()) {
    n.final_label = n.label;
  }
}

const LabelSet& final_of(LabeledTree& t, std::uint32_t s) {
  auto& n = live(t, s);
  if (!n.final_label) finish(n);
  if (!n.final_label) throw PreconditionError("label of " + n.id + " is not closed");
  return *n.final_label;
}

std::uint32_t add_child(LabeledTree& t, std::uint32_t s, Action a, LabelSet l, const std::string& tag) {
  auto me = static_cast<std::uint32_t>(t.nodes.size());
  LabeledTree::Node n;
  n.id = t.nodes[s].id + "." + a.name() + "#" + tag;
  n.initial = l;
  n.label = std::move(l);
  n.parent = s;
  finish(n);
  t.nodes.push_back(std::move(n));
  t.rel.emplace_back();
  t.rel[s].push_back({a, StateId{me}});
  return me;
}

}  // namespace

std::vector<Formula> pending_conjunctions(const LabeledTree& t, std::uint32_t s) {
  return pending(t.node(s).label, PropShape::Conjunctive);
}

std::vector<Formula> pending_disjunctions(const LabeledTree& t, std::uint32_t s) {
  return pending(t.node(s).label, PropShape::Disjunctive);
}

void move_and(LabeledTree& t, std::uint32_t s) {
  auto& n = live(t, s);
  std::vector<Formula> out;
  for (Formula f : n.label) {
    Formula x, y;
    if (prop_shape(f, x, y) == PropShape::Conjunctive) {
      out.push_back(x);
      out.push_back(y);
    } else {
      out.push_back(f);
    }
  }
  n.label = LabelSet(std::move(out));
  finish(n);
}

void move_or(LabeledTree& t, std::uint32_t s, const std::vector<bool>& take_left) {
  auto& n = live(t, s);
  if (take_left.size() != pending(n.label, PropShape::Disjunctive).size()) {
    throw PreconditionError("one choice per disjunction expected");
  }
  std::vector<Formula> out;
  std::size_t i = 0;
  for (Formula f : n.label) {
    Formula x, y;
    if (prop_shape(f, x, y) == PropShape::Disjunctive) {
      out.push_back(take_left[i++] ? x : y);
    } else {
      out.push_back(f);
    }
  }
  n.label = LabelSet(std::move(out));
  finish(n);
}

std::vector<std::uint32_t> move_diamond(LabeledTree& t, std::uint32_t s) {
  LabelSet l = final_of(t, s);
  std::vector<std::uint32_t> out;
  std::map<std::string, int> count;
  for (const auto& d : diamond_demands(l)) {
    int k = count[d.action.name()]++;
    out.push_back(add_child(t, s, d.action, box_successor(l, d.action).with(d.body), std::to_string(k)));
  }
  return out;
}

std::optional<std::uint32_t> move_box(LabeledTree& t, std::uint32_t s, std::optional<Action> choice) {
  LabelSet l = final_of(t, s);
  if (!choice) return std::nullopt;
  return add_child(t, s, *choice, box_successor(l, *choice), "box");
}

void move_sub(LabeledTree& t, std::uint32_t s, const LabelSet& added, Formula phi) {
  auto& n = live(t, s);
  auto sub = subformulae(phi);
  for (Formula f : added) {
    if (!std::binary_search(sub.begin(), sub.end(), f)) {
      throw PreconditionError(to_string(f) + " is not a subformula of " + to_string(phi));
    }
  }
  n.label = n.label.merged(added);
  n.final_label.reset();
  finish(n);
}

std::vector<std::uint32_t> move_rem(LabeledTree& t, std::uint32_t s) {
  live(t, s);
  std::vector<std::uint32_t> removed;
  std::set<Action> actions;
  for (const Edge& e : t.rel[s]) actions.insert(e.action);
  for (Action a : actions) {
    auto kids = t.successors(s, a);
    for (std::uint32_t k : kids) {
      const LabelSet& mine = t.nodes[k].label;
      for (std::uint32_t other : kids) {
        if (other == k || t.nodes[other].removed) continue;
        const LabelSet& theirs = t.nodes[other].label;
        // Strictly smaller, or equal and a later sibling.
        if (mine.subset_of(theirs) && (mine != theirs || other < k)) {
          t.nodes[k].removed = true;
          removed.push_back(k);
          break;
        }
      }
    }
  }
  return removed;
}

LabelSet game_formula_closure(const std::vector<Formula>& roots) {
  std::set<Formula> seen;
  std::vector<Formula> todo;
  auto push = [&](Formula f) {
    if (seen.insert(f).second) todo.push_back(f);
  };
  for (Formula r : roots) {
    for (Formula f : subformulae(r)) push(f);
  }
  while (!todo.empty()) {
    Formula f = todo.back();
    todo.pop_back();
    Formula x, y;
    if (prop_shape(f, x, y) != PropShape::Elementary) {
      push(x);
      push(y);
    } else if (f.is_modal()) {
      push(f.body());
    } else if (f.is(Op::Not) && f.body().is_modal()) {
      push(Formula::negate(f.body().body()));
    }
  }
  return LabelSet(std::vector<Formula>(seen.begin(), seen.end()));
}

// ---------------------------------------------------------------------------

std::size_t GameSolver::SimKeyHash::operator()(const SimKey& k) const noexcept {
  return (k.a.hash() * 31 + k.b.hash()) * 31 + static_cast<std::size_t>(k.n);
}

namespace {

struct PKey {
  int round;
  LabelSet p1, p2, q;
  friend bool operator==(const PKey& x, const PKey& y) {
    return x.round == y.round && x.p1 == y.p1 && x.p2 == y.p2 && x.q == y.q;
  }
};

struct PKeyHash {
  std::size_t operator()(const PKey& k) const noexcept {
    return ((k.p1.hash() * 31 + k.p2.hash()) * 31 + k.q.hash()) * 31 + static_cast<std::size_t>(k.round);
  }
};

int max_md(const LabelSet& a, const LabelSet& b) {
  int m = 0;
  for (Formula f : a) m = std::max(m, md(f));
  for (Formula f : b) m = std::max(m, md(f));
  return m;
}

// Successor labels created by the diamond move on a closed label, along a.
std::vector<LabelSet> demand_bases(const LabelSet& closed, Action a) {
  std::vector<LabelSet> out;
  LabelSet boxes = box_successor(closed, a);
  for (const auto& d : diamond_demands(closed)) {
    if (d.action == a) out.push_back(boxes.with(d.body));
  }
  return out;
}

// Distinct sets obtained by choosing one entry of each list.
std::set<std::vector<LabelSet>> choice_sets(const std::vector<const std::vector<LabelSet>*>& lists) {
  std::set<std::vector<LabelSet>> out;
  std::vector<LabelSet> cur;
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == lists.size()) {
      std::vector<LabelSet> s = cur;
      std::sort(s.begin(), s.end());
      s.erase(std::unique(s.begin(), s.end()), s.end());
      out.insert(std::move(s));
      return;
    }
    for (const LabelSet& l : *lists[i]) {
      cur.push_back(l);
      rec(i + 1);
      cur.pop_back();
    }
  };
  rec(0);
  return out;
}

std::string line(int round, int step, char player, const std::string& move, const std::string& state,
                 const std::string& detail) {
  std::ostringstream os;
  os << "round=" << round << " step=" << step << " player=" << player << " move=" << move << " state=" << state
     << " detail=" << detail;
  return os.str();
}

std::string sim_name(int n, const LabelSet& a, const LabelSet& b) {
  return "Sim^" + std::to_string(n) + "(" + a.to_string() + ", " + b.to_string() + ")";
}

std::string child_id(const std::string& parent, Action a, const std::string& tag) {
  return parent + "." + a.name() + "#" + tag;
}

}  // namespace

struct GameSolver::Prime {
  int n;
  Formula phi;
  int md;
  std::vector<LabelSet> extras;
  std::unordered_map<LabelSet, std::vector<LabelSet>, LabelSetHash> options;
  std::unordered_map<PKey, bool, PKeyHash> win;
};

GameSolver::GameSolver(Alphabet alphabet, SearchCaps caps) : alphabet_(std::move(alphabet)), caps_(caps), tab_(caps) {}
GameSolver::~GameSolver() = default;

Stats GameSolver::stats() const {
  Stats s = stats_;
  s.sat_calls = tab_.stats().sat_calls;
  return s;
}

void GameSolver::charge() {
  ++stats_.search_nodes;
  if (caps_.max_nodes && stats_.search_nodes > caps_.max_nodes) throw CapExceeded("game node cap exceeded");
}

void GameSolver::check_label(const LabelSet& l) {
  if (universe_ && !l.subset_of(*universe_)) {
    throw std::logic_error("label " + l.to_string() + " leaves the formula closure");
  }
}

const std::vector<LabelSet>& GameSolver::sat_closures(const LabelSet& l) {
  if (auto it = sat_closures_.find(l); it != sat_closures_.end()) return it->second;
  auto cs = tab_.satisfiable_closures(l);
  for (const auto& c : cs) check_label(c);
  return sat_closures_.emplace(l, std::move(cs)).first->second;
}

// --- Sim^n -----------------------------------------------------------------

void GameSolver::add_roots(const std::vector<Formula>& roots) {
  LabelSet more = game_formula_closure(roots);
  universe_ = universe_ ? universe_->merged(more) : more;
}

bool GameSolver::sim(int n, const LabelSet& u1, const LabelSet& u2) {
  if (n < 1) throw PreconditionError("level must be positive");
  std::vector<Formula> roots(u1.begin(), u1.end());
  roots.insert(roots.end(), u2.begin(), u2.end());
  add_roots(roots);
  return sim_rec(n, u1, u2);
}

bool GameSolver::sim_rec(int n, const LabelSet& u1, const LabelSet& u2) {
  SimKey key{n, u1, u2};
  if (auto it = sim_entry_.find(key); it != sim_entry_.end()) return it->second;
  charge();
  bool a = true;
  if (n >= 2) a = sim_rec(n - 1, u1, u2) && sim_rec(n - 1, u2, u1);
  if (a) {
    const int bound = max_md(u1, u2) + 2;
    // Copies: recursion may rehash the closure table.
    std::vector<LabelSet> c1 = sat_closures(u1), c2 = sat_closures(u2);
    for (std::size_t i = 0; i < c1.size() && a; ++i) {
      for (std::size_t j = 0; j < c2.size() && a; ++j) a = sim_round(n, c1[i], c2[j], 2, bound);
    }
  }
  sim_entry_.emplace(std::move(key), a);
  return a;
}

bool GameSolver::good_pair(int n, const LabelSet& x, const LabelSet& y) {
  return n < 2 || (sim_rec(n - 1, x, y) && sim_rec(n - 1, y, x));
}

bool GameSolver::sim_round(int n, const LabelSet& c1, const LabelSet& c2, int round, int bound) {
  if (round > bound) throw std::logic_error("play passed round md+2");
  SimKey key{n, c1, c2};
  if (auto it = sim_round_.find(key); it != sim_round_.end()) return it->second;
  charge();
  bool a = true;
  for (std::size_t ai = 0; ai < alphabet_.size() && a; ++ai) {
    Action act = alphabet_[ai];
    std::vector<LabelSet> bases = demand_bases(c1, act);
    bases.push_back(box_successor(c1, act));
    std::vector<LabelSet> answers = demand_bases(c2, act);
    for (const LabelSet& base : bases) {
      std::vector<LabelSet> picks = sat_closures(base);
      for (const LabelSet& d1 : picks) {
        // A needs a successor of p2 that works for every closure B gives it.
        bool answered = false;
        for (const LabelSet& ans : answers) {
          std::vector<LabelSet> ys = sat_closures(ans);
          bool all = true;
          for (const LabelSet& y : ys) {
            if (!good_pair(n, d1, y) || !sim_round(n, d1, y, round + 1, bound)) {
              all = false;
              break;
            }
          }
          if (all) {
            answered = true;
            break;
          }
        }
        if (!answered) {
          a = false;
          break;
        }
      }
      if (!a) break;
    }
  }
  sim_round_.emplace(std::move(key), a);
  return a;
}

// --- prime-n-sp --------------------------------------------------------------

GameSolver::Prime& GameSolver::prime_context(int n, Formula phi) {
  for (auto& p : primes_) {
    if (p->n == n && p->phi == phi) return *p;
  }
  auto p = std::make_unique<Prime>();
  p->n = n;
  p->phi = phi;
  p->md = md(phi);
  // Every union of closures of subformulae: what A(sub) followed by closure
  // can add to a label.
  std::set<LabelSet> acc{LabelSet{}};
  for (Formula f : subformulae(phi)) {
    auto cs = propositional_closures(LabelSet{f});
    std::set<LabelSet> next = acc;
    for (const LabelSet& x : acc) {
      for (const LabelSet& c : cs) {
        charge();
        LabelSet u = x.merged(c);
        if (propositionally_consistent(u)) next.insert(std::move(u));
      }
    }
    acc = std::move(next);
  }
  p->extras.assign(acc.begin(), acc.end());
  primes_.push_back(std::move(p));
  return *primes_.back();
}

const std::vector<LabelSet>& GameSolver::a_options(Prime& p, const LabelSet& base) {
  if (auto it = p.options.find(base); it != p.options.end()) return it->second;
  std::set<LabelSet> out;
  std::vector<LabelSet> cs = tab_.closures(base);
  for (const LabelSet& c : cs) {
    for (const LabelSet& x : p.extras) {
      charge();
      LabelSet u = c.merged(x);
      if (propositionally_consistent(u) && tab_.closure_satisfiable(u)) out.insert(std::move(u));
    }
  }
  std::vector<LabelSet> v(out.begin(), out.end());
  for (const auto& l : v) check_label(l);
  return p.options.emplace(base, std::move(v)).first->second;
}

bool GameSolver::primensp(int n, Formula phi) {
  if (n < 3) throw PreconditionError("prime-n-sp needs n >= 3");
  add_roots({phi});
  Prime& p = prime_context(n, phi);
  LabelSet root{phi};
  if (!sim_rec(n - 1, root, root)) return false;
  std::vector<LabelSet> cs = sat_closures(root);
  std::vector<LabelSet> qs = a_options(p, root);
  for (std::size_t i = 0; i < cs.size(); ++i) {
    for (std::size_t j = i; j < cs.size(); ++j) {
      bool found = std::any_of(qs.begin(), qs.end(), [&](const LabelSet& q) { return pwin(p, 2, cs[i], cs[j], q); });
      if (!found) return false;
    }
  }
  return true;
}

bool GameSolver::pwin(Prime& p, int round, const LabelSet& p1, const LabelSet& p2, const LabelSet& q) {
  if (round > p.md + 2) throw std::logic_error("play passed round md+2");
  PKey key{round, p1, p2, q};
  if (auto it = p.win.find(key); it != p.win.end()) return it->second;
  charge();
  bool a = true;
  for (std::size_t ai = 0; ai < alphabet_.size() && a; ++ai) {
    Action act = alphabet_[ai];
    if (!demand_bases(q, act).empty()) a = pround(p, round, act, p1, p2, q);
  }
  p.win.emplace(std::move(key), a);
  return a;
}

bool GameSolver::pround(Prime& p, int round, Action a, const LabelSet& p1, const LabelSet& p2, const LabelSet& q) {
  auto b1 = demand_bases(p1, a), b2 = demand_bases(p2, a), bq = demand_bases(q, a);
  if (b1.empty() || b2.empty()) return false;
  std::vector<std::vector<LabelSet>> c1, c2;
  for (const auto& b : b1) c1.push_back(sat_closures(b));
  for (const auto& b : b2) c2.push_back(sat_closures(b));
  std::vector<const std::vector<LabelSet>*> l1, l2;
  for (const auto& c : c1) l1.push_back(&c);
  for (const auto& c : c2) l2.push_back(&c);
  auto xsets = choice_sets(l1), ysets = choice_sets(l2);
  for (const auto& xs : xsets) {
    for (const auto& ys : ysets) {
      charge();
      if (!a_answers(p, round, bq, xs, ys, nullptr)) return false;
    }
  }
  return true;
}

bool GameSolver::answerable(Prime& p, int round, const LabelSet& z, const std::vector<LabelSet>& xs,
                            const std::vector<LabelSet>& ys, std::pair<LabelSet, LabelSet>* reply) {
  if (round > p.md + 1) return false;
  for (const LabelSet& x : xs) {
    if (!good_pair(p.n, z, x)) continue;
    for (const LabelSet& y : ys) {
      if (good_pair(p.n, z, y) && pwin(p, round + 1, x, y, z)) {
        if (reply) *reply = {x, y};
        return true;
      }
    }
  }
  return false;
}

bool GameSolver::a_answers(Prime& p, int round, const std::vector<LabelSet>& q_bases, const std::vector<LabelSet>& xs,
                           const std::vector<LabelSet>& ys, std::vector<LabelSet>* choice) {
  std::map<LabelSet, bool> memo;
  auto ok = [&](const LabelSet& z) {
    auto it = memo.find(z);
    if (it != memo.end()) return it->second;
    bool v = answerable(p, round, z, xs, ys, nullptr);
    memo.emplace(z, v);
    return v;
  };
  const std::size_t m = q_bases.size();
  std::vector<std::vector<LabelSet>> opts;
  for (const auto& b : q_bases) opts.push_back(a_options(p, b));

  // A(rem) keeps the maximal labels, so those must all be answerable. Cheap
  // case first: every successor has an answerable option of its own.
  std::vector<std::optional<LabelSet>> first(m);
  std::vector<std::size_t> bad;
  for (std::size_t t = 0; t < m; ++t) {
    for (const auto& o : opts[t]) {
      if (ok(o)) {
        first[t] = o;
        break;
      }
    }
    if (!first[t]) bad.push_back(t);
  }
  if (bad.size() == m) return false;
  if (bad.empty()) {
    if (choice) {
      choice->clear();
      for (auto& f : first) choice->push_back(*f);
    }
    return true;
  }
  // Otherwise the unanswerable successors must each get an option below some
  // answerable label chosen for another successor.
  if (bad.size() > 63) throw CapExceeded("too many successors for A(rem) search");
  struct Cover {
    std::uint64_t mask;
    LabelSet label;
  };
  std::vector<std::size_t> goods;
  std::vector<std::vector<Cover>> covers;
  for (std::size_t t = 0; t < m; ++t) {
    if (!first[t]) continue;
    goods.push_back(t);
    std::map<std::uint64_t, LabelSet> by_mask;
    for (const auto& c : opts[t]) {
      if (!ok(c)) continue;
      std::uint64_t mask = 0;
      for (std::size_t bi = 0; bi < bad.size(); ++bi) {
        const auto& bo = opts[bad[bi]];
        if (std::any_of(bo.begin(), bo.end(), [&](const LabelSet& o) { return o.subset_of(c); })) mask |= 1ull << bi;
      }
      by_mask.emplace(mask, c);
    }
    covers.emplace_back();
    for (auto& [mask, l] : by_mask) covers.back().push_back({mask, l});
  }
  const std::uint64_t full = bad.size() == 64 ? ~0ull : (1ull << bad.size()) - 1;
  std::vector<std::size_t> pick(goods.size(), 0);
  std::function<bool(std::size_t, std::uint64_t)> rec = [&](std::size_t g, std::uint64_t got) {
    if (g == goods.size()) return got == full;
    for (std::size_t i = 0; i < covers[g].size(); ++i) {
      charge();
      pick[g] = i;
      if (rec(g + 1, got | covers[g][i].mask)) return true;
    }
    return false;
  };
  if (!rec(0, 0)) return false;
  if (choice) {
    choice->assign(m, LabelSet{});
    for (std::size_t g = 0; g < goods.size(); ++g) (*choice)[goods[g]] = covers[g][pick[g]].label;
    for (std::size_t bi = 0; bi < bad.size(); ++bi) {
      for (std::size_t g = 0; g < goods.size(); ++g) {
        const LabelSet& c = covers[g][pick[g]].label;
        const auto& bo = opts[bad[bi]];
        auto it = std::find_if(bo.begin(), bo.end(), [&](const LabelSet& o) { return o.subset_of(c); });
        if (it != bo.end()) {
          (*choice)[bad[bi]] = *it;
          break;
        }
      }
    }
  }
  return true;
}

// --- traces ----------------------------------------------------------------

std::vector<std::string> GameSolver::explain_sim(int n, const LabelSet& u1, const LabelSet& u2) {
  std::vector<std::string> out;
  explain_sim_entry(n, u1, u2, out);
  return out;
}

void GameSolver::explain_sim_entry(int n, const LabelSet& u1, const LabelSet& u2, std::vector<std::string>& out) {
  if (n >= 2) {
    for (int order = 0; order < 2; ++order) {
      const LabelSet& x = order ? u2 : u1;
      const LabelSet& y = order ? u1 : u2;
      bool w = sim(n - 1, x, y);
      out.push_back(line(0, 0, 'A', "pregame", "T1:r", sim_name(n - 1, x, y) + (w ? " won by A" : " won by B")));
      if (!w) return;
    }
  }
  std::vector<LabelSet> c1 = sat_closures(u1), c2 = sat_closures(u2);
  if (c1.empty() || c2.empty()) {
    out.push_back(line(1, 1, 'B', "lose", c1.empty() ? "T1:r" : "T2:r", "unsatisfiable label"));
    return;
  }
  const int bound = max_md(u1, u2) + 2;
  std::size_t bi = 0, bj = 0;
  if (!sim(n, u1, u2)) {
    for (bi = 0; bi < c1.size(); ++bi) {
      for (bj = 0; bj < c2.size(); ++bj) {
        if (!sim_round(n, c1[bi], c2[bj], 2, bound)) goto chosen;
      }
    }
  }
chosen:
  out.push_back(line(1, 1, 'B', tab_.closures(u1).size() > 1 ? "B(or)" : "B(and)", "T1:r", "L=" + c1[bi].to_string()));
  out.push_back(line(1, 1, 'B', tab_.closures(u2).size() > 1 ? "B(or)" : "B(and)", "T2:r", "L=" + c2[bj].to_string()));
  explain_sim_round(n, c1[bi], c2[bj], 2, bound, "r", "r", out);
}

void GameSolver::explain_sim_round(int n, const LabelSet& c1, const LabelSet& c2, int round, int bound,
                                   const std::string& id1, const std::string& id2, std::vector<std::string>& out) {
  const bool a = sim_round(n, c1, c2, round, bound);
  // B's move: action, successor of p1 (demand index or box) and its closure.
  struct Pick {
    Action act;
    std::string tag;
    LabelSet d1;
  };
  std::optional<Pick> pick;
  // B prefers a successor that A cannot answer at all.
  if (!a) {
    for (std::size_t ai = 0; ai < alphabet_.size() && !pick; ++ai) {
      Action act = alphabet_[ai];
      if (!demand_bases(c2, act).empty()) continue;
      std::vector<LabelSet> bases = demand_bases(c1, act);
      bases.push_back(box_successor(c1, act));
      for (std::size_t k = 0; k < bases.size() && !pick; ++k) {
        const auto& picks = sat_closures(bases[k]);
        if (!picks.empty()) pick = Pick{act, k + 1 == bases.size() ? "box" : std::to_string(k), picks.front()};
      }
    }
  }
  if (!pick) [&] {
    for (std::size_t ai = 0; ai < alphabet_.size(); ++ai) {
      Action act = alphabet_[ai];
      std::vector<LabelSet> bases = demand_bases(c1, act);
      bases.push_back(box_successor(c1, act));
      std::vector<LabelSet> answers = demand_bases(c2, act);
      for (std::size_t k = 0; k < bases.size(); ++k) {
        std::vector<LabelSet> picks = sat_closures(bases[k]);
        for (const LabelSet& d1 : picks) {
          Pick cand{act, k + 1 == bases.size() ? "box" : std::to_string(k), d1};
          bool answered = a || std::any_of(answers.begin(), answers.end(), [&](const LabelSet& ans) {
            std::vector<LabelSet> ys = sat_closures(ans);
            return std::all_of(ys.begin(), ys.end(), [&](const LabelSet& y) {
              return good_pair(n, d1, y) && sim_round(n, d1, y, round + 1, bound);
            });
          });
          // When A wins every move loses for B, so show the first one.
          if (a || !answered) {
            pick = cand;
            return;
          }
        }
      }
    }
  }();
  std::size_t nd1 = diamond_demands(c1).size(), nd2 = diamond_demands(c2).size();
  out.push_back(line(round, 1, 'B', "B(diamond)", "T1:" + id1, "successors=" + std::to_string(nd1)));
  out.push_back(line(round, 1, 'B', "B(diamond)", "T2:" + id2, "successors=" + std::to_string(nd2)));
  if (!pick) {
    out.push_back(line(round, 1, 'B', "B(box)", "T1:" + id1, "none"));
    out.push_back(line(round, 2, 'B', "lose", "T1:" + id1, "no successors"));
    return;
  }
  out.push_back(line(round, 1, 'B', "B(box)", "T1:" + id1, pick->tag == "box" ? pick->act.name() : "none"));
  const std::string c1id = child_id(id1, pick->act, pick->tag);
  out.push_back(line(round, 1, 'B', "B(or)", "T1:" + c1id, "L=" + pick->d1.to_string()));
  const std::string pick_line = line(round, 2, 'B', "pick", "T1:" + c1id, "action=" + pick->act.name());
  std::vector<LabelSet> answers = demand_bases(c2, pick->act);
  if (answers.empty()) {
    out.push_back(pick_line);
    out.push_back(line(round, 3, 'A', "lose", "T2:" + id2, "no " + pick->act.name() + "-successor"));
    return;
  }
  // A's reply and the closure B gives it.
  std::size_t ai = 0;
  std::optional<LabelSet> y;
  for (std::size_t k = 0; k < answers.size() && !y; ++k) {
    std::vector<LabelSet> ys = sat_closures(answers[k]);
    bool all = true;
    std::optional<LabelSet> bad;
    for (const LabelSet& cand : ys) {
      if (!good_pair(n, pick->d1, cand) || !sim_round(n, pick->d1, cand, round + 1, bound)) {
        all = false;
        bad = cand;
        break;
      }
    }
    if (a && all) {
      ai = k;
      y = ys.front();
    } else if (!a && k == 0) {
      ai = 0;
      y = bad ? *bad : ys.front();
    }
  }
  const std::string c2id = child_id(id2, pick->act, std::to_string(ai));
  out.push_back(line(round, 1, 'B', "B(or)", "T2:" + c2id, "L=" + y->to_string()));
  out.push_back(pick_line);
  out.push_back(line(round, 3, 'A', "pick", "T2:" + c2id, "action=" + pick->act.name()));
  if (n >= 2) {
    bool g1 = sim(n - 1, pick->d1, *y);
    out.push_back(line(round, 5, 'A', "subgame", "T1:" + c1id, sim_name(n - 1, pick->d1, *y) + (g1 ? " won by A" : " won by B")));
    if (!g1) return;
    bool g2 = sim(n - 1, *y, pick->d1);
    out.push_back(line(round, 5, 'A', "subgame", "T2:" + c2id, sim_name(n - 1, *y, pick->d1) + (g2 ? " won by A" : " won by B")));
    if (!g2) return;
  }
  explain_sim_round(n, pick->d1, *y, round + 1, bound, c1id, c2id, out);
}

std::vector<std::string> GameSolver::explain_primensp(int n, Formula phi) {
  std::vector<std::string> out;
  LabelSet root{phi};
  bool w = sim(n - 1, root, root);
  out.push_back(line(1, 1, 'A', "pregame", "T1:r", sim_name(n - 1, root, root) + (w ? " won by A" : " won by B")));
  if (!w) return out;
  Prime& p = prime_context(n, phi);
  std::vector<LabelSet> cs = sat_closures(root);
  std::vector<LabelSet> qs = a_options(p, root);
  const bool a = primensp(n, phi);
  std::size_t bi = 0, bj = 0;
  std::optional<LabelSet> q;
  for (std::size_t i = 0; i < cs.size() && !q; ++i) {
    for (std::size_t j = i; j < cs.size() && !q; ++j) {
      auto it = std::find_if(qs.begin(), qs.end(), [&](const LabelSet& c) { return pwin(p, 2, cs[i], cs[j], c); });
      if (a || it == qs.end()) {
        bi = i;
        bj = j;
        q = it != qs.end() ? *it : qs.front();
      }
    }
  }
  out.push_back(line(1, 2, 'B', "B(or)", "T1:r", "L=" + cs[bi].to_string()));
  out.push_back(line(1, 2, 'B', "B(or)", "T2:r", "L=" + cs[bj].to_string()));
  out.push_back(line(1, 3, 'A', "A(sub)", "T3:r", "L=" + q->to_string()));
  explain_prime_round(p, 2, cs[bi], cs[bj], *q, "r", "r", "r", out);
  return out;
}

void GameSolver::explain_prime_round(Prime& p, int round, const LabelSet& p1, const LabelSet& p2, const LabelSet& q,
                                     const std::string& id1, const std::string& id2, const std::string& idq,
                                     std::vector<std::string>& out) {
  const bool a = pwin(p, round, p1, p2, q);
  std::optional<Action> act;
  for (std::size_t i = 0; i < alphabet_.size(); ++i) {
    Action c = alphabet_[i];
    if (demand_bases(q, c).empty()) continue;
    if (a || !pround(p, round, c, p1, p2, q)) {
      act = c;
      break;
    }
  }
  out.push_back(line(round, 1, 'B', "B(diamond)", "T1:" + id1, "successors=" + std::to_string(diamond_demands(p1).size())));
  out.push_back(line(round, 1, 'B', "B(diamond)", "T2:" + id2, "successors=" + std::to_string(diamond_demands(p2).size())));
  out.push_back(line(round, 2, 'A', "A(diamond)", "T3:" + idq, "successors=" + std::to_string(diamond_demands(q).size())));
  if (!act) {
    out.push_back(line(round, 3, 'B', "lose", "T3:" + idq, "no successors"));
    return;
  }
  auto b1 = demand_bases(p1, *act), b2 = demand_bases(p2, *act), bq = demand_bases(q, *act);
  const std::string j = act->name();
  if (b1.empty() || b2.empty()) {
    out.push_back(line(round, 3, 'B', "pick", "T3:" + child_id(idq, *act, "0"), "action=" + j));
    out.push_back(line(round, 4, 'A', "lose", b1.empty() ? "T1:" + id1 : "T2:" + id2, "no " + j + "-successor"));
    return;
  }
  // B's closures for the successors of p1 and p2 along j.
  std::vector<std::vector<LabelSet>> c1, c2;
  for (const auto& b : b1) c1.push_back(sat_closures(b));
  for (const auto& b : b2) c2.push_back(sat_closures(b));
  auto dedup = [](std::vector<LabelSet> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
  };
  std::vector<LabelSet> xs, ys;
  for (const auto& c : c1) xs.push_back(c.front());
  for (const auto& c : c2) ys.push_back(c.front());
  if (!a) {
    // Find the assignment A cannot answer.
    bool found = false;
    std::vector<std::size_t> i1(c1.size(), 0), i2(c2.size(), 0);
    std::function<bool(std::size_t)> rec = [&](std::size_t k) -> bool {
      if (k == c1.size() + c2.size()) {
        std::vector<LabelSet> x, y;
        for (std::size_t t = 0; t < c1.size(); ++t) x.push_back(c1[t][i1[t]]);
        for (std::size_t t = 0; t < c2.size(); ++t) y.push_back(c2[t][i2[t]]);
        if (!a_answers(p, round, bq, dedup(x), dedup(y), nullptr)) {
          xs = x;
          ys = y;
          return true;
        }
        return false;
      }
      auto& idx = k < c1.size() ? i1[k] : i2[k - c1.size()];
      const auto& list = k < c1.size() ? c1[k] : c2[k - c1.size()];
      for (idx = 0; idx < list.size(); ++idx) {
        if (rec(k + 1)) return true;
      }
      return false;
    };
    found = rec(0);
    if (!found) throw std::logic_error("no losing assignment found for a losing round");
  }
  for (std::size_t t = 0; t < xs.size(); ++t) {
    out.push_back(line(round, 1, 'B', "B(or)", "T1:" + child_id(id1, *act, std::to_string(t)), "L=" + xs[t].to_string()));
  }
  for (std::size_t t = 0; t < ys.size(); ++t) {
    out.push_back(line(round, 1, 'B', "B(or)", "T2:" + child_id(id2, *act, std::to_string(t)), "L=" + ys[t].to_string()));
  }
  std::vector<LabelSet> choice;
  if (!a_answers(p, round, bq, dedup(xs), dedup(ys), &choice)) {
    choice.clear();
    for (const auto& b : bq) choice.push_back(a_options(p, b).front());
  }
  for (std::size_t t = 0; t < choice.size(); ++t) {
    out.push_back(line(round, 2, 'A', "A(sub)", "T3:" + child_id(idq, *act, std::to_string(t)), "L=" + choice[t].to_string()));
  }
  // A(rem): keep maximal labels, first of equals.
  std::vector<std::size_t> kept;
  std::string removed;
  for (std::size_t t = 0; t < choice.size(); ++t) {
    bool gone = false;
    for (std::size_t u = 0; u < choice.size() && !gone; ++u) {
      if (u == t) continue;
      if (choice[t].subset_of(choice[u]) && (choice[t] != choice[u] || u < t)) gone = true;
    }
    if (gone) {
      removed += (removed.empty() ? "" : ",") + child_id(idq, *act, std::to_string(t));
    } else {
      kept.push_back(t);
    }
  }
  out.push_back(line(round, 2, 'A', "A(rem)", "T3:" + idq, "removed=" + (removed.empty() ? std::string("none") : removed)));
  auto dx = dedup(xs), dy = dedup(ys);
  std::size_t pickq = kept.front();
  std::pair<LabelSet, LabelSet> reply;
  bool answered = false;
  for (std::size_t t : kept) {
    bool ok = answerable(p, round, choice[t], dx, dy, &reply);
    if (a || !ok) {
      pickq = t;
      answered = ok;
      break;
    }
  }
  const LabelSet& z = choice[pickq];
  const std::string qid = child_id(idq, *act, std::to_string(pickq));
  out.push_back(line(round, 3, 'B', "pick", "T3:" + qid, "action=" + j));
  if (!answered) {
    // Every reply fails; show the first.
    reply = {xs.front(), ys.front()};
  }
  auto index_of = [](const std::vector<LabelSet>& v, const LabelSet& l) {
    return static_cast<std::size_t>(std::find(v.begin(), v.end(), l) - v.begin());
  };
  const std::string x_id = child_id(id1, *act, std::to_string(index_of(xs, reply.first)));
  const std::string y_id = child_id(id2, *act, std::to_string(index_of(ys, reply.second)));
  out.push_back(line(round, 4, 'A', "pick", "T1:" + x_id, "action=" + j));
  out.push_back(line(round, 4, 'A', "pick", "T2:" + y_id, "action=" + j));
  const LabelSet* sides[4][2] = {{&z, &reply.first}, {&reply.first, &z}, {&z, &reply.second}, {&reply.second, &z}};
  for (auto& s : sides) {
    bool w = sim(p.n - 1, *s[0], *s[1]);
    out.push_back(line(round, 5, 'A', "subgame", "T3:" + qid, sim_name(p.n - 1, *s[0], *s[1]) + (w ? " won by A" : " won by B")));
    if (!w) return;
  }
  if (round >= p.md + 2) {
    out.push_back(line(round, 6, 'A', "lose", "T3:" + qid, "round limit reached"));
    return;
  }
  explain_prime_round(p, round + 1, reply.first, reply.second, z, x_id, y_id, qid, out);
}

// --- verdicts ----------------------------------------------------------------

namespace {

Alphabet full_alphabet(const Alphabet& alphabet, const std::vector<Formula>& fs) {
  Alphabet out = alphabet;
  for (Formula f : fs) out = out.merged(Alphabet(actions_of(f)));
  return out;
}

void check_level(int n, Formula phi) {
  FragmentTag t = rewritten_fragment_level(phi);
  if (t.kind != FragmentTag::Kind::NS || t.level > n) {
    throw PreconditionError(to_string(phi) + " is not in L_" + std::to_string(n) + "S");
  }
}

template <typename F>
Verdict run(const std::string& problem, GameSolver& g, F&& body) {
  Stopwatch clock;
  Verdict v;
  v.problem = problem;
  try {
    body(v);
  } catch (const CapExceeded& e) {
    v.value = false;
    v.complete = false;
    v.note = e.what();
  }
  v.stats = g.stats();
  v.stats.runtime_ms = clock.elapsed_ms();
  return v;
}

}  // namespace

Verdict a_wins_sim(int n, const LabelSet& u1, const LabelSet& u2, const Alphabet& alphabet, GameOptions opts) {
  std::vector<Formula> fs(u1.begin(), u1.end());
  fs.insert(fs.end(), u2.begin(), u2.end());
  GameSolver g(full_alphabet(alphabet, fs), opts.caps);
  return run("game-sim", g, [&](Verdict& v) {
    v.value = g.sim(n, u1, u2);
    if (opts.trace) v.trace = g.explain_sim(n, u1, u2);
  });
}

Verdict a_wins_primensp(int n, Formula phi, const Alphabet& alphabet, GameOptions opts) {
  if (n < 3) throw PreconditionError("prime-n-sp needs n >= 3");
  check_level(n, phi);
  GameSolver g(full_alphabet(alphabet, {phi}), opts.caps);
  if (!g.tableau().satisfiable(phi)) throw PreconditionError("prime-n-sp needs a satisfiable formula");
  return run("game-primensp", g, [&](Verdict& v) {
    v.value = g.primensp(n, phi);
    if (opts.trace) v.trace = g.explain_primensp(n, phi);
  });
}

Verdict decide_characteristic_modulo(int n, Formula phi, const Alphabet& alphabet, GameOptions opts) {
  if (n < 1) throw PreconditionError("level must be positive");
  GameSolver g(full_alphabet(alphabet, {phi}), opts.caps);
  return run("characteristic-modulo", g, [&](Verdict& v) {
    if (!g.tableau().satisfiable(phi)) {
      v.value = false;
      v.note = "unsatisfiable";
      return;
    }
    LabelSet u{phi};
    v.value = g.sim(n, u, u);
    if (opts.trace) v.trace = g.explain_sim(n, u, u);
  });
}

Verdict decide_characteristic_within(int n, Formula phi, const Alphabet& alphabet, GameOptions opts) {
  if (n < 3) throw PreconditionError("the game procedure needs n >= 3");
  check_level(n, phi);
  GameSolver g(full_alphabet(alphabet, {phi}), opts.caps);
  return run("characteristic-within", g, [&](Verdict& v) {
    if (!g.tableau().satisfiable(phi)) {
      v.value = false;
      v.note = "unsatisfiable";
      return;
    }
    v.value = g.primensp(n, phi);
    if (opts.trace) v.trace = g.explain_primensp(n, phi);
  });
}

Verdict decide_prime(int n, Formula phi, const Alphabet& alphabet, GameOptions opts) {
  if (n < 3) throw PreconditionError("the game procedure needs n >= 3");
  check_level(n, phi);
  GameSolver g(full_alphabet(alphabet, {phi}), opts.caps);
  return run("prime", g, [&](Verdict& v) {
    if (!g.tableau().satisfiable(phi)) {
      v.value = true;
      v.note = "unsatisfiable, hence prime";
      return;
    }
    v.value = g.primensp(n, phi);
    if (opts.trace) v.trace = g.explain_primensp(n, phi);
  });
}

}  // namespace nestsim
