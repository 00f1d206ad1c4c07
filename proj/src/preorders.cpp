#include "nestsim/preorders.hpp"

#include <algorithm>
#include <numeric>

namespace nestsim {

std::uint64_t fingerprint(const Lts& l) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](std::uint64_t v) {
    h ^= v;
    h *= 1099511628211ull;
  };
  mix(l.num_states());
  for (const auto& t : l.transitions()) {
    mix(t.source.index);
    mix(t.action.id());
    mix(t.target.index);
  }
  return h;
}

RelationTable::RelationTable(RelationKind kind, int level, const Lts& l)
    : kind_(kind), level_(level), n_(l.num_states()), fingerprint_(fingerprint(l)), bits_(n_ * n_, false) {}

std::size_t RelationTable::count() const { return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), true)); }

std::vector<std::pair<StateId, StateId>> RelationTable::pairs() const {
  std::vector<std::pair<StateId, StateId>> out;
  for (std::uint32_t p = 0; p < n_; ++p) {
    for (std::uint32_t q = 0; q < n_; ++q) {
      if (bits_[p * n_ + q]) out.emplace_back(StateId{p}, StateId{q});
    }
  }
  return out;
}

namespace {

// States ordered by height, so every successor precedes its source.
std::vector<StateId> by_height(const Lts& l) {
  std::vector<int> h(l.num_states());
  for (StateId s : l.states()) h[s.index] = depth(l, s);
  std::vector<StateId> order = l.states();
  std::stable_sort(order.begin(), order.end(), [&](StateId x, StateId y) { return h[x.index] < h[y.index]; });
  return order;
}

bool matches(const Lts& l, const RelationTable& r, StateId p, StateId q) {
  for (const Edge& e : l.edges(p)) {
    bool found = false;
    for (const Edge& f : l.edges(q)) {
      if (f.action == e.action && r.contains(e.target, f.target)) {
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

// Deletes pairs violating the simulation clause from the constraint set.
// Pairs are settled in height order of the left state; on a loop-free LTS
// the clause only consults pairs whose left state is strictly lower, so one
// pass reaches the greatest fixpoint.
template <typename Constraint>
RelationTable refine(const Lts& l, RelationKind kind, int level, Constraint allowed) {
  RelationTable r(kind, level, l);
  auto order = by_height(l);
  for (StateId p : order) {
    for (StateId q : l.states()) r.set(p, q, allowed(p, q) && matches(l, r, p, q));
  }
  return r;
}

}  // namespace

RelationTable simulation(const Lts& l) {
  return refine(l, RelationKind::Sim, 1, [](StateId, StateId) { return true; });
}

RelationTable nsim(const Lts& l, int n) {
  if (n < 1) throw std::invalid_argument("nsim level must be positive");
  RelationTable prev = refine(l, RelationKind::NSim, 1, [](StateId, StateId) { return true; });
  for (int k = 2; k <= n; ++k) {
    prev = refine(l, RelationKind::NSim, k, [&](StateId p, StateId q) { return prev.contains(q, p); });
  }
  return prev;
}

RelationTable bisim(const Lts& l) {
  RelationTable r(RelationKind::Bisim, 0, l);
  auto order = by_height(l);
  std::vector<int> rank(l.num_states());
  for (std::size_t i = 0; i < order.size(); ++i) rank[order[i].index] = static_cast<int>(i);
  // Settle pairs by the larger rank of the two states so both directions of
  // the clause see only settled pairs.
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      StateId p = order[i], q = order[j];
      bool fwd = true, bwd = true;
      for (const Edge& e : l.edges(p)) {
        bool found = false;
        for (const Edge& f : l.edges(q)) {
          if (f.action == e.action && r.contains(e.target, f.target)) {
            found = true;
            break;
          }
        }
        if (!found) {
          fwd = false;
          break;
        }
      }
      if (fwd) {
        for (const Edge& f : l.edges(q)) {
          bool found = false;
          for (const Edge& e : l.edges(p)) {
            if (f.action == e.action && r.contains(e.target, f.target)) {
              found = true;
              break;
            }
          }
          if (!found) {
            bwd = false;
            break;
          }
        }
      }
      bool v = fwd && bwd;
      r.set(p, q, v);
      r.set(q, p, v);
    }
  }
  return r;
}

RelationTable kernel(const Lts& l, int n) {
  RelationTable s = nsim(l, n);
  RelationTable k(RelationKind::Kernel, n, l);
  for (StateId p : l.states()) {
    for (StateId q : l.states()) k.set(p, q, s.contains(p, q) && s.contains(q, p));
  }
  return k;
}

bool LazyNsim::le(int n, StateId p, StateId q) {
  if (n <= 0 || p == q) return true;
  std::uint64_t key = (static_cast<std::uint64_t>(n) << 56) | (static_cast<std::uint64_t>(p.index) << 28) | q.index;
  if (auto it = memo_.find(key); it != memo_.end()) return it->second;
  bool ok = le(n - 1, q, p);
  if (ok) {
    for (const Edge& e : l_.edges(p)) {
      bool found = false;
      for (const Edge& f : l_.edges(q)) {
        if (f.action == e.action && le(n, e.target, f.target)) {
          found = true;
          break;
        }
      }
      if (!found) {
        ok = false;
        break;
      }
    }
  }
  memo_.emplace(key, ok);
  return ok;
}

bool nsim_holds(const Process& p, const Process& q, int n) {
  Lts u = disjoint_union(p.lts, q.lts);
  LazyNsim rel(u);
  return rel.le(n, p.root, shifted(p.lts, q.root));
}

bool kernel_holds(const Process& p, const Process& q, int n) {
  Lts u = disjoint_union(p.lts, q.lts);
  LazyNsim rel(u);
  return rel.equiv(n, p.root, shifted(p.lts, q.root));
}

bool bisimilar(const Process& p, const Process& q) {
  return canonical_term(p.lts, p.root) == canonical_term(q.lts, q.root);
}

}  // namespace nestsim
