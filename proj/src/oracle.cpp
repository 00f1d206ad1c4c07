#include "nestsim/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "nestsim/preorders.hpp"
#include "nestsim/semantics.hpp"

namespace nestsim {

std::string UniverseBounds::describe() const {
  std::string s = "alphabet=" + alphabet.to_string() + " depth=" + std::to_string(depth) + " width=" +
                  std::to_string(width) + " max_edges=";
  s += max_edges ? std::to_string(*max_edges) : "none";
  s += " max_processes=" + std::to_string(max_processes);
  return s;
}

namespace {

struct Option {
  std::size_t cost;  // unfolded edges, counting the edges into the children
  int depth;         // max child depth, -1 when empty
  std::vector<std::uint32_t> children;
};

// Subsets of the candidate children with at most `width` members and cost
// within budget, cheapest first.
std::vector<Option> child_sets(const std::vector<std::uint32_t>& pool, const std::vector<std::size_t>& cost,
                               const std::vector<int>& depth, int width, std::size_t budget) {
  std::vector<Option> out;
  Option cur{0, -1, {}};
  auto rec = [&](auto&& self, std::size_t from) -> void {
    out.push_back(cur);
    if (static_cast<int>(cur.children.size()) == width) return;
    for (std::size_t i = from; i < pool.size(); ++i) {
      std::uint32_t c = pool[i];
      std::size_t extra = 1 + cost[c];
      if (cur.cost + extra > budget) continue;
      Option saved = cur;
      cur.cost += extra;
      cur.depth = std::max(cur.depth, depth[c]);
      cur.children.push_back(c);
      self(self, i + 1);
      cur = std::move(saved);
    }
  };
  rec(rec, 0);
  std::stable_sort(out.begin(), out.end(), [](const Option& x, const Option& y) { return x.cost < y.cost; });
  return out;
}

}  // namespace

Universe::Universe(const UniverseBounds& b) : bounds_(b), lts_(b.alphabet) {
  if (b.depth < 0 || b.width < 1) throw std::invalid_argument("bad universe bounds");
  const std::size_t budget = b.max_edges.value_or(static_cast<std::size_t>(-1) / 4);
  std::vector<std::size_t> cost;
  std::vector<int> depth;
  members_.push_back(lts_.add_state("0"));
  cost.push_back(0);
  depth.push_back(0);

  const std::size_t k = b.alphabet.size();
  for (int d = 1; d <= b.depth && !truncated_; ++d) {
    std::vector<std::uint32_t> pool;
    for (StateId s : members_) pool.push_back(s.index);
    auto options = child_sets(pool, cost, depth, b.width, budget);
    std::vector<std::size_t> pick(k, 0);
    // Choose one option per action; keep only processes of depth exactly d.
    auto rec = [&](auto&& self, std::size_t a, std::size_t spent, int deepest) -> void {
      if (truncated_) return;
      if (a == k) {
        if (deepest != d - 1) return;
        if (members_.size() >= b.max_processes) {
          truncated_ = true;
          return;
        }
        StateId s = lts_.add_state();
        for (std::size_t i = 0; i < k; ++i) {
          for (std::uint32_t c : options[pick[i]].children) lts_.add_transition(s, b.alphabet[i], StateId{c});
        }
        members_.push_back(s);
        cost.push_back(spent);
        depth.push_back(d);
        return;
      }
      for (std::size_t i = 0; i < options.size(); ++i) {
        if (spent + options[i].cost > budget) break;
        pick[a] = i;
        self(self, a + 1, spent + options[i].cost, std::max(deepest, options[i].depth));
      }
    };
    rec(rec, 0, 0, -1);
  }
}

std::shared_ptr<const Universe> universe_for(const UniverseBounds& b) {
  static std::mutex mu;
  static std::map<std::string, std::shared_ptr<const Universe>> cache;
  std::string key = b.describe();
  {
    std::lock_guard lock(mu);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  auto u = std::make_shared<const Universe>(b);
  std::lock_guard lock(mu);
  return cache.emplace(key, u).first->second;
}

std::vector<Process> enum_processes(const UniverseBounds& b) {
  auto u = universe_for(b);
  std::vector<Process> out;
  for (StateId s : u->members()) out.push_back(restrict_to(u->lts(), s));
  return out;
}

std::vector<Process> brute_models(Formula f, const UniverseBounds& b) {
  auto u = universe_for(b);
  ModelChecker mc(u->lts());
  std::vector<Process> out;
  for (StateId s : u->members()) {
    if (mc.check(s, f)) out.push_back(restrict_to(u->lts(), s));
  }
  return out;
}

UniverseBounds default_bounds(Formula f, const Alphabet& alphabet) {
  UniverseBounds b;
  b.alphabet = alphabet.merged(Alphabet(actions_of(f)));
  b.depth = md(f) + 1;
  std::size_t modal = 0;
  for (Formula g : subformulae(f)) modal += g.is_modal() ? 1 : 0;
  b.width = static_cast<int>(modal) + 1;
  b.max_edges = std::clamp<std::size_t>(modal + static_cast<std::size_t>(md(f)) + 2, 4, 10);
  return b;
}

namespace {

struct Scan {
  std::shared_ptr<const Universe> u;
  std::vector<StateId> models;
};

Scan scan(Formula f, const UniverseBounds& b) {
  Scan s{universe_for(b), {}};
  ModelChecker mc(s.u->lts());
  for (StateId p : s.u->members()) {
    if (mc.check(p, f)) s.models.push_back(p);
  }
  return s;
}

void annotate(Verdict& v, const Scan& s, Formula f) {
  v.stats.search_nodes = s.u->members().size();
  if (s.u->truncated()) {
    v.complete = false;
    v.note = "universe truncated: " + s.u->bounds().describe();
  } else if (!v.value && s.u->bounds().depth >= md(f) + 1) {
    v.note = "certified";
  } else {
    v.note = "within bounds: " + s.u->bounds().describe();
  }
}

std::optional<StateId> least_model(int n, const Scan& s, LazyNsim& rel) {
  if (s.models.empty()) return std::nullopt;
  StateId cand = s.models.front();
  for (StateId p : s.models) {
    if (rel.le(n, p, cand)) cand = p;
  }
  for (StateId p : s.models) {
    if (!rel.le(n, cand, p)) return std::nullopt;
  }
  return cand;
}

double witness_bound(Formula f) {
  double m = static_cast<double>(size(f));
  return std::pow(2 * m + 1, m + 1);
}

}  // namespace

Verdict brute_characteristic_modulo(int n, Formula f, const UniverseBounds& b) {
  Stopwatch clock;
  Verdict v;
  v.problem = "oracle-characteristic-modulo";
  Scan s = scan(f, b);
  LazyNsim rel(s.u->lts());
  v.value = !s.models.empty();
  for (StateId p : s.models) {
    if (!rel.equiv(n, s.models.front(), p)) {
      v.value = false;
      v.counterexample = {restrict_to(s.u->lts(), s.models.front()), restrict_to(s.u->lts(), p)};
      break;
    }
  }
  if (v.value) v.witness = restrict_to(s.u->lts(), s.models.front());
  annotate(v, s, f);
  v.stats.runtime_ms = clock.elapsed_ms();
  return v;
}

Verdict brute_characteristic_within(int n, Formula f, const UniverseBounds& b) {
  Stopwatch clock;
  Verdict v;
  v.problem = "oracle-characteristic-within";
  Scan s = scan(f, b);
  LazyNsim rel(s.u->lts());
  auto q = least_model(n, s, rel);
  v.value = q.has_value();
  if (q) {
    v.witness = restrict_to(s.u->lts(), *q);
    if (static_cast<double>(process_size(v.witness->lts, v.witness->root)) > witness_bound(f)) {
      throw std::logic_error("witness exceeds the size bound");
    }
  }
  annotate(v, s, f);
  v.stats.runtime_ms = clock.elapsed_ms();
  return v;
}

Verdict brute_prime(int n, Formula f, const UniverseBounds& b) {
  Verdict v = brute_characteristic_within(n, f, b);
  v.problem = "oracle-prime";
  if (!v.value) {
    Scan s = scan(f, b);
    if (s.models.empty()) {
      v.value = true;
      annotate(v, s, f);
      v.note = "no models; " + v.note;
    } else if (s.models.size() >= 2) {
      // Report a pair without a common lower bound among the models; the
      // search is cubic, so only the smallest models are tried.
      LazyNsim rel(s.u->lts());
      std::size_t limit = std::min<std::size_t>(s.models.size(), 64);
      for (std::size_t i = 0; i < limit && !v.counterexample; ++i) {
        for (std::size_t j = i + 1; j < limit && !v.counterexample; ++j) {
          bool common = std::any_of(s.models.begin(), s.models.end(), [&](StateId q) {
            return rel.le(n, q, s.models[i]) && rel.le(n, q, s.models[j]);
          });
          if (!common) v.counterexample = {restrict_to(s.u->lts(), s.models[i]), restrict_to(s.u->lts(), s.models[j])};
        }
      }
    }
  }
  return v;
}

bool is_certified(const Verdict& v) { return v.complete && v.note == "certified"; }

}  // namespace nestsim
