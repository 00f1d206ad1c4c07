#include "nestsim/twosim.hpp"

#include <algorithm>
#include <atomic>
#include <deque>
#include <map>
#include <mutex>
#include <set>
#include <thread>
#include <tuple>

#include "nestsim/preorders.hpp"
#include "nestsim/semantics.hpp"

namespace nestsim {

namespace {

void require_2s(Formula phi) {
  FragmentTag t = rewritten_fragment_level(phi);
  if (t.kind != FragmentTag::Kind::NS || t.level > 2) {
    throw PreconditionError("formula is not in L_2S: " + to_string(phi));
  }
}

bool has_ff(const LabelSet& l) { return l.contains(Formula::ff()); }

LabelSet box_bodies(const LabelSet& l, Action a) {
  std::vector<Formula> out;
  for (Formula f : l) {
    if (f.is(Op::Box) && f.action() == a) out.push_back(f.body());
  }
  return LabelSet(std::move(out));
}

std::vector<std::pair<Action, Formula>> diamonds(const LabelSet& l) {
  std::vector<std::pair<Action, Formula>> out;
  for (Formula f : l) {
    if (f.is(Op::Diamond)) out.emplace_back(f.action(), f.body());
  }
  return out;
}

// Resolves conjunctions and disjunctions, smallest formula first, asking
// `pick` for each disjunction. Stops early once ff appears.
template <class PickFn>
LabelSet saturate_with(const LabelSet& initial, PickFn&& pick) {
  std::set<Formula> cur(initial.begin(), initial.end());
  while (!cur.count(Formula::ff())) {
    auto it = std::find_if(cur.begin(), cur.end(), [](Formula f) { return f.is(Op::And) || f.is(Op::Or); });
    if (it == cur.end()) break;
    Formula f = *it;
    cur.erase(it);
    if (f.is(Op::And)) {
      cur.insert(f.lhs());
      cur.insert(f.rhs());
    } else {
      cur.insert(pick(f) == Pick::Left ? f.lhs() : f.rhs());
    }
  }
  return LabelSet(std::vector<Formula>(cur.begin(), cur.end()));
}

struct Saturation {
  std::vector<Pick> picks;
  LabelSet closed;
};

// Every pick sequence, left before right; one entry per distinct result.
std::vector<Saturation> all_saturations(const LabelSet& initial) {
  std::vector<Saturation> out;
  std::set<LabelSet> seen;
  std::vector<Pick> prefix;
  auto rec = [&](auto&& self) -> void {
    std::size_t used = 0;
    bool branched = false;
    LabelSet closed = saturate_with(initial, [&](Formula) {
      if (used < prefix.size()) return prefix[used++];
      branched = true;
      return Pick::Left;
    });
    if (!branched) {
      if (seen.insert(closed).second) out.push_back({prefix, closed});
      return;
    }
    // The first unscripted disjunction is at position prefix.size().
    for (Pick p : {Pick::Left, Pick::Right}) {
      prefix.push_back(p);
      self(self);
      prefix.pop_back();
    }
  };
  rec(rec);
  return out;
}

}  // namespace

ConProRun conpro_run(Formula phi, const ChoiceScript& script, const Alphabet& alphabet_in) {
  require_2s(phi);
  const Alphabet alphabet = alphabet_in.merged(Alphabet(actions_of(phi)));
  const Formula root_formula = to_nnf(phi);
  const int cutoff = md(phi) + 1;
  const int budget = static_cast<int>(size(phi));

  ConProRun run;
  run.lts = Lts(alphabet);
  std::size_t next_pick = 0, next_phase = 0;

  auto fresh = [&](LabelSet label, int d) {
    StateId s = run.lts.add_state("s" + std::to_string(run.lts.num_states()));
    run.label.push_back(std::move(label));
    run.depth.push_back(d);
    return s;
  };
  auto stop = [&](std::string why) {
    run.stopped = true;
    run.stop_reason = std::move(why);
    return run;
  };

  run.root = fresh(LabelSet{root_formula}, 0);
  std::deque<StateId> queue{run.root};
  while (!queue.empty()) {
    StateId s = queue.front();
    queue.pop_front();
    LabelSet closed = saturate_with(run.label[s.index], [&](Formula f) {
      if (next_pick >= script.disjunct_picks.size()) throw ScriptError("no disjunct pick left for " + to_string(f));
      return script.disjunct_picks[next_pick++];
    });
    run.label[s.index] = closed;
    if (has_ff(closed)) return stop("ff in the saturated label of " + run.lts.name(s));

    const int d = run.depth[s.index];
    auto spawn = [&](Action a, LabelSet label) -> bool {
      StateId t = fresh(std::move(label), d + 1);
      run.lts.add_transition(s, a, t);
      if (has_ff(run.label[t.index])) return false;
      if (d + 1 < cutoff) queue.push_back(t);
      return true;
    };
    for (auto [a, body] : diamonds(closed)) {
      if (!spawn(a, box_bodies(closed, a).with(body))) return stop("ff in a diamond successor of " + run.lts.name(s));
    }

    if (next_phase >= script.box_phases.size()) throw ScriptError("no box phase left for " + run.lts.name(s));
    const auto& phase = script.box_phases[next_phase++];
    if (!phase) continue;
    if (phase->n < 1 || phase->n > budget - run.box_count) {
      throw ScriptError("box phase size " + std::to_string(phase->n) + " outside 1.." +
                        std::to_string(budget - run.box_count));
    }
    if (static_cast<int>(phase->picks.size()) != phase->n) throw ScriptError("box phase needs one action per child");
    for (Action a : phase->picks) {
      if (!alphabet.contains(a)) throw ScriptError("box action outside the alphabet: " + a.name());
      if (!spawn(a, box_bodies(closed, a))) return stop("ff in a box successor of " + run.lts.name(s));
      ++run.box_count;
    }
  }
  if (next_pick != script.disjunct_picks.size() || next_phase != script.box_phases.size()) {
    throw ScriptError("script has unused entries");
  }
  return run;
}

namespace {

// Hash-consed loop-free processes: one state per bisimilarity class.
class TreeStore {
 public:
  explicit TreeStore(Alphabet alphabet) : lts_(std::move(alphabet)) {}

  using Kids = std::vector<std::pair<std::uint32_t, std::uint32_t>>;  // (action id, tree)

  std::uint32_t intern(Kids kids) {
    std::sort(kids.begin(), kids.end());
    kids.erase(std::unique(kids.begin(), kids.end()), kids.end());
    auto [it, fresh] = index_.emplace(kids, static_cast<std::uint32_t>(lts_.num_states()));
    if (fresh) {
      StateId s = lts_.add_state();
      for (auto [a, t] : kids) lts_.add_transition(s, action_of(a), StateId{t});
    }
    return it->second;
  }

  const Lts& lts() const { return lts_; }

 private:
  Action action_of(std::uint32_t id) const {
    for (Action a : lts_.alphabet()) {
      if (a.id() == id) return a;
    }
    throw std::logic_error("unknown action id");
  }

  Lts lts_;
  std::map<Kids, std::uint32_t> index_;
};

struct Derivation {
  int cost = 0;  // box children in the subtree
  std::vector<Pick> picks;
  LabelSet closed;
  std::vector<std::uint32_t> diamond_trees;  // per diamond demand of closed
  std::vector<std::pair<Action, std::uint32_t>> box_trees;
};

using NodeOuts = std::map<std::uint32_t, Derivation>;

class Enumerator {
 public:
  Enumerator(Formula phi, const Alphabet& alphabet, const TwoSimOptions& opts)
      : alphabet_(alphabet), store_(alphabet), opts_(opts), cutoff_(md(phi) + 1),
        budget_(std::min(opts.box_budget.value_or(static_cast<int>(size(phi))), static_cast<int>(size(phi)))) {}

  const NodeOuts& outs(const LabelSet& label, int d) {
    auto key = std::make_pair(label, d);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    NodeOuts result;
    if (has_ff(label)) {
      // Stops before anything is produced.
    } else if (d >= cutoff_) {
      result.emplace(store_.intern({}), Derivation{});
    } else {
      for (const Saturation& sat : all_saturations(label)) expand(sat, d, result);
    }
    return memo_.emplace(key, std::move(result)).first->second;
  }

  const NodeOuts& lookup(const LabelSet& label, int d) const { return memo_.at({label, d}); }
  const TreeStore& store() const { return store_; }
  std::uint64_t partials() const { return partials_; }
  int cutoff() const { return cutoff_; }

 private:
  struct Partial {
    int cost = 0;
    std::vector<std::uint32_t> diamond_trees;
    std::vector<std::pair<Action, std::uint32_t>> box_trees;
  };
  using Partials = std::map<TreeStore::Kids, Partial>;

  void charge() {
    ++partials_;
    std::uint64_t cap = opts_.caps.max_nodes ? opts_.caps.max_nodes : opts_.max_partials;
    if (partials_ > cap) throw CapExceeded("ConPro enumeration cap");
  }

  void offer(Partials& into, TreeStore::Kids kids, Partial p) {
    if (p.cost > budget_) return;
    std::sort(kids.begin(), kids.end());
    kids.erase(std::unique(kids.begin(), kids.end()), kids.end());
    auto it = into.find(kids);
    if (it == into.end()) {
      charge();
      into.emplace(std::move(kids), std::move(p));
    } else if (p.cost < it->second.cost) {
      it->second = std::move(p);
    }
  }

  void expand(const Saturation& sat, int d, NodeOuts& result) {
    const LabelSet& closed = sat.closed;
    if (has_ff(closed)) return;

    Partials cur;
    cur.emplace(TreeStore::Kids{}, Partial{});
    for (auto [a, body] : diamonds(closed)) {
      const NodeOuts& child = outs(box_bodies(closed, a).with(body), d + 1);
      if (child.empty()) return;  // every choice below stops the run
      Partials next;
      for (const auto& [kids, p] : cur) {
        for (const auto& [tree, der] : child) {
          TreeStore::Kids k = kids;
          k.emplace_back(a.id(), tree);
          Partial q = p;
          q.cost += der.cost;
          q.diamond_trees.push_back(tree);
          offer(next, std::move(k), std::move(q));
        }
      }
      cur = std::move(next);
    }

    // Box block: any nonempty set of extra children within the budget.
    std::vector<std::tuple<Action, std::uint32_t, int>> extras;
    for (Action a : alphabet_) {
      for (const auto& [tree, der] : outs(box_bodies(closed, a), d + 1)) extras.emplace_back(a, tree, 1 + der.cost);
    }
    Partials all = std::move(cur);
    for (const auto& [a, tree, cost] : extras) {
      Partials added;
      for (const auto& [kids, p] : all) {
        if (p.cost + cost > budget_) continue;
        TreeStore::Kids k = kids;
        k.emplace_back(a.id(), tree);
        Partial q = p;
        q.cost += cost;
        q.box_trees.emplace_back(a, tree);
        offer(added, std::move(k), std::move(q));
      }
      for (auto& [kids, p] : added) offer(all, kids, std::move(p));
    }

    for (auto& [kids, p] : all) {
      std::uint32_t tree = store_.intern(kids);
      auto it = result.find(tree);
      if (it != result.end() && it->second.cost <= p.cost) continue;
      result[tree] = Derivation{p.cost, sat.picks, closed, std::move(p.diamond_trees), std::move(p.box_trees)};
      if (result.size() > opts_.max_outputs) throw CapExceeded("ConPro output cap");
    }
  }

  Alphabet alphabet_;
  TreeStore store_;
  TwoSimOptions opts_;
  int cutoff_;
  int budget_;
  std::uint64_t partials_ = 0;
  std::map<std::pair<LabelSet, int>, NodeOuts> memo_;
};

// Lays the derivation out in the order ConPro consumes choices.
ChoiceScript reconstruct(const Enumerator& e, const LabelSet& root_label, std::uint32_t root_tree) {
  ChoiceScript script;
  std::deque<std::tuple<LabelSet, int, std::uint32_t>> queue{{root_label, 0, root_tree}};
  while (!queue.empty()) {
    auto [label, d, tree] = queue.front();
    queue.pop_front();
    const Derivation& der = e.lookup(label, d).at(tree);
    script.disjunct_picks.insert(script.disjunct_picks.end(), der.picks.begin(), der.picks.end());
    if (d + 1 < e.cutoff()) {
      auto ds = diamonds(der.closed);
      for (std::size_t i = 0; i < ds.size(); ++i) {
        queue.emplace_back(box_bodies(der.closed, ds[i].first).with(ds[i].second), d + 1, der.diamond_trees[i]);
      }
      for (auto [a, t] : der.box_trees) queue.emplace_back(box_bodies(der.closed, a), d + 1, t);
    }
    if (der.box_trees.empty()) {
      script.box_phases.emplace_back(std::nullopt);
    } else {
      BoxPhase phase;
      phase.n = static_cast<int>(der.box_trees.size());
      for (auto [a, t] : der.box_trees) phase.picks.push_back(a);
      script.box_phases.emplace_back(std::move(phase));
    }
  }
  return script;
}

}  // namespace

ConProEnumeration conpro_enumerate(Formula phi, const Alphabet& alphabet_in, TwoSimOptions opts) {
  require_2s(phi);
  const Alphabet alphabet = alphabet_in.merged(Alphabet(actions_of(phi)));
  ConProEnumeration out;
  Enumerator e(phi, alphabet, opts);
  const LabelSet root{to_nnf(phi)};
  const NodeOuts* roots = nullptr;
  try {
    roots = &e.outs(root, 0);
  } catch (const CapExceeded&) {
    out.complete = false;
    out.partials = e.partials();
    return out;
  }
  out.partials = e.partials();

  struct Ranked {
    std::size_t size;
    std::string term;
    std::uint32_t tree;
  };
  std::vector<Ranked> ranked;
  for (const auto& [tree, der] : *roots) {
    StateId s{tree};
    ranked.push_back({process_size(e.store().lts(), s), canonical_term(e.store().lts(), s), tree});
  }
  std::sort(ranked.begin(), ranked.end(),
            [](const Ranked& x, const Ranked& y) { return std::tie(x.size, x.term) < std::tie(y.size, y.term); });
  for (const Ranked& r : ranked) {
    ConProOutput o;
    o.process = restrict_to(e.store().lts(), StateId{r.tree});
    o.script = reconstruct(e, root, r.tree);
    o.box_count = roots->at(r.tree).cost;
    out.outputs.push_back(std::move(o));
  }
  return out;
}

std::optional<Process> mlb_2s(const Lts& l, StateId p1, StateId p2) {
  Process a = restrict_to(l, p1), b = restrict_to(l, p2);
  Lts u = disjoint_union(a.lts, b.lts);
  if (!validate_loop_free(u)) throw PreconditionError("mlb needs loop-free processes");
  StateId r1 = a.root, r2 = shifted(a.lts, b.root);
  RelationTable k = kernel(u, 1);
  if (!k.contains(r1, r2)) return std::nullopt;

  Process g{Lts(u.alphabet()), StateId{0}};
  std::map<std::pair<std::uint32_t, std::uint32_t>, StateId> ids;
  std::deque<std::pair<StateId, StateId>> todo;
  auto id_of = [&](StateId x, StateId y) {
    auto [it, fresh] = ids.emplace(std::make_pair(x.index, y.index), StateId{});
    if (fresh) {
      it->second = g.lts.add_state();
      todo.emplace_back(x, y);
    }
    return it->second;
  };
  g.root = id_of(r1, r2);
  while (!todo.empty()) {
    auto [x, y] = todo.front();
    todo.pop_front();
    StateId from = ids.at({x.index, y.index});
    for (const Edge& ex : u.edges(x)) {
      for (const Edge& ey : u.edges(y)) {
        if (ex.action != ey.action || !k.contains(ex.target, ey.target)) continue;
        g.lts.add_transition(from, ex.action, id_of(ex.target, ey.target));
      }
    }
  }
  if (!nsim_holds(g, a, 2) || !nsim_holds(g, b, 2)) {
    throw std::logic_error("mlb construction is not below both processes");
  }
  return g;
}

namespace {

// Pairs (i, j) with i <= j, ordered by j then i, so pairs of small outputs
// come first.
std::size_t pair_row_start(std::size_t j) { return j * (j + 1) / 2; }

std::pair<std::size_t, std::size_t> pair_at(std::size_t k) {
  std::size_t j = 0;
  while (pair_row_start(j + 1) <= k) ++j;
  return {k - pair_row_start(j), j};
}

// Smallest index in [from, to) for which bad(k) holds, or to.
template <class Bad>
std::size_t first_bad(std::size_t from, std::size_t to, unsigned threads, Bad&& bad) {
  if (threads <= 1) {
    for (std::size_t k = from; k < to; ++k) {
      if (bad(k)) return k;
    }
    return to;
  }
  std::atomic<std::size_t> next{from}, best{to};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex mu;
  auto work = [&] {
    for (;;) {
      std::size_t k = next.fetch_add(1);
      if (k >= best.load() || failed.load()) return;
      try {
        if (!bad(k)) continue;
      } catch (...) {
        std::lock_guard lock(mu);
        if (!error) error = std::current_exception();
        failed = true;
        return;
      }
      std::size_t cur = best.load();
      while (k < cur && !best.compare_exchange_weak(cur, k)) {
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return best.load();
}

// Outputs of ConPro under growing box budgets. Each stage appends the
// outputs that first appear at its budget, so earlier indices stay fixed.
class Stages {
 public:
  Stages(Formula phi, const Alphabet& alphabet, TwoSimOptions opts)
      : phi_(phi), alphabet_(alphabet), opts_(opts), limit_(static_cast<int>(size(phi))) {
    if (opts.box_budget) limit_ = std::min(limit_, *opts.box_budget);
  }

  // Returns false once every budget has been explored or a cap was hit.
  bool advance() {
    if (next_ > limit_ || !complete_) return false;
    TwoSimOptions o = opts_;
    o.box_budget = next_++;
    ConProEnumeration e = conpro_enumerate(phi_, alphabet_, o);
    partials_ += e.partials;
    for (auto& out : e.outputs) {
      if (seen_.insert(canonical_term(out.process.lts, out.process.root)).second) outputs_.push_back(std::move(out));
    }
    if (!e.complete) complete_ = false;
    return true;
  }

  const std::vector<ConProOutput>& outputs() const { return outputs_; }
  bool complete() const { return complete_; }
  std::uint64_t partials() const { return partials_; }

 private:
  Formula phi_;
  Alphabet alphabet_;
  TwoSimOptions opts_;
  int limit_;
  int next_ = 0;
  bool complete_ = true;
  std::uint64_t partials_ = 0;
  std::set<std::string> seen_;
  std::vector<ConProOutput> outputs_;
};

// Meet of all outputs, re-read through its canonical term to stay small.
std::optional<Process> meet_all(const std::vector<ConProOutput>& outs, Formula phi) {
  if (outs.empty()) return std::nullopt;
  Process g = outs.front().process;
  for (std::size_t i = 1; i < outs.size(); ++i) {
    Lts u = disjoint_union(g.lts, outs[i].process.lts);
    auto m = mlb_2s(u, g.root, shifted(g.lts, outs[i].process.root));
    if (!m) return std::nullopt;
    g = term_to_lts(parse_process(canonical_term(m->lts, m->root)), m->lts.alphabet());
  }
  if (!models(g, phi)) return std::nullopt;
  return g;
}

struct PrimeScan {
  Verdict verdict;
  std::vector<ConProOutput> outputs;
};

PrimeScan prime_scan(Formula phi, const Alphabet& alphabet, const TwoSimOptions& opts) {
  require_2s(phi);
  Stopwatch clock;
  PrimeScan scan;
  Verdict& v = scan.verdict;
  v.problem = "prime-2s";
  Stages stages(phi, alphabet, opts);
  const auto& outs = stages.outputs();
  auto reject_reason = [&](std::size_t k) -> std::optional<std::string> {
    auto [i, j] = pair_at(k);
    const Process& p1 = outs[i].process;
    const Process& p2 = outs[j].process;
    Lts u = disjoint_union(p1.lts, p2.lts);
    auto g = mlb_2s(u, p1.root, shifted(p1.lts, p2.root));
    if (!g) return "no maximal lower bound: the outputs are not simulation equivalent";
    if (!models(*g, phi)) return "the maximal lower bound does not satisfy the formula";
    return std::nullopt;
  };

  std::size_t checked = 0;
  v.value = true;
  while (stages.advance()) {
    const std::size_t count = pair_row_start(outs.size());
    std::size_t bad = first_bad(checked, count, opts.threads, [&](std::size_t k) { return reject_reason(k).has_value(); });
    checked = count;
    if (bad < count) {
      auto [i, j] = pair_at(bad);
      v.value = false;
      v.counterexample = {outs[i].process, outs[j].process};
      v.note = *reject_reason(bad);
      break;
    }
  }
  if (v.value) {
    v.complete = stages.complete();
    if (!v.complete) {
      v.note = "ConPro enumeration cap reached after " + std::to_string(outs.size()) + " outputs";
    } else if (outs.empty()) {
      v.note = "unsatisfiable, hence prime";
    } else {
      v.note = std::to_string(outs.size()) + " outputs, " + std::to_string(checked) + " pairs accepted";
    }
  }
  v.stats.search_nodes = stages.partials();
  v.stats.runtime_ms = clock.elapsed_ms();
  scan.outputs = outs;
  return scan;
}

}  // namespace

Verdict prime_2s(Formula phi, const Alphabet& alphabet, TwoSimOptions opts) {
  return prime_scan(phi, alphabet, opts).verdict;
}

Verdict characteristic_2s(Formula phi, CharMode mode, const Alphabet& alphabet, TwoSimOptions opts) {
  require_2s(phi);
  Stopwatch clock;
  Verdict v;
  v.problem = mode == CharMode::Within ? "characteristic-2s-within" : "characteristic-2s-modulo";
  Tableau tab(opts.caps);
  bool satisfiable = false;
  try {
    satisfiable = tab.satisfiable(phi);
  } catch (const CapExceeded&) {
    v.complete = false;
    v.note = "satisfiability search cap reached";
  }
  v.stats.sat_calls = tab.stats().sat_calls;
  if (!satisfiable) {
    if (v.complete) v.note = "unsatisfiable";
    v.stats.runtime_ms = clock.elapsed_ms();
    return v;
  }

  if (mode == CharMode::Within) {
    PrimeScan scan = prime_scan(phi, alphabet, opts);
    Verdict& p = scan.verdict;
    v.value = p.value;
    v.complete = p.complete;
    v.counterexample = std::move(p.counterexample);
    v.note = p.note;
    v.stats.search_nodes = p.stats.search_nodes;
    if (v.value && v.complete) v.witness = meet_all(scan.outputs, phi);
    v.stats.runtime_ms = clock.elapsed_ms();
    return v;
  }

  Stages stages(phi, alphabet, opts);
  const auto& outs = stages.outputs();
  std::size_t checked = 1;
  bool rejected = false;
  while (!rejected && stages.advance()) {
    if (outs.empty()) continue;
    std::size_t bad = first_bad(checked, outs.size(), opts.threads, [&](std::size_t k) {
      return !kernel_holds(outs.front().process, outs[k].process, 2);
    });
    if (bad < outs.size()) {
      rejected = true;
      v.value = false;
      v.counterexample = {outs.front().process, outs[bad].process};
      v.note = "two outputs are not 2-nested simulation equivalent";
    }
    checked = outs.size();
  }
  if (!rejected) {
    if (stages.complete() && outs.empty()) throw std::logic_error("satisfiable formula without ConPro output");
    v.value = stages.complete();
    v.complete = stages.complete();
    if (v.complete) {
      v.witness = outs.front().process;
    } else {
      v.note = "ConPro enumeration cap reached after " + std::to_string(outs.size()) + " outputs";
    }
  }
  v.stats.search_nodes = stages.partials();
  v.stats.runtime_ms = clock.elapsed_ms();
  return v;
}

}  // namespace nestsim
