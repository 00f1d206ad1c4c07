#include "nestsim/semantics.hpp"

#include "nestsim/tableau.hpp"

namespace nestsim {

namespace {

template <typename Self>
bool eval(const Lts& l, StateId p, Formula f, Self&& self) {
  switch (f.op()) {
    case Op::Tt: return true;
    case Op::Ff: return false;
    case Op::And: return self(p, f.lhs()) && self(p, f.rhs());
    case Op::Or: return self(p, f.lhs()) || self(p, f.rhs());
    case Op::Not: return !self(p, f.body());
    case Op::Diamond:
      for (const Edge& e : l.edges(p)) {
        if (e.action == f.action() && self(e.target, f.body())) return true;
      }
      return false;
    case Op::Box:
      for (const Edge& e : l.edges(p)) {
        if (e.action == f.action() && !self(e.target, f.body())) return false;
      }
      return true;
  }
  return false;
}

}  // namespace

bool models(const Lts& l, StateId p, Formula f) {
  auto self = [&](auto&& rec, StateId q, Formula g) -> bool {
    return eval(l, q, g, [&](StateId r, Formula h) { return rec(rec, r, h); });
  };
  return self(self, p, f);
}

bool ModelChecker::check(StateId p, Formula f) {
  if (f.is(Op::Tt)) return true;
  if (f.is(Op::Ff)) return false;
  std::uint64_t key = (static_cast<std::uint64_t>(f.id()) << 32) | p.index;
  if (auto it = memo_.find(key); it != memo_.end()) return it->second;
  bool v = eval(l_, p, f, [&](StateId q, Formula g) { return check(q, g); });
  memo_.emplace(key, v);
  return v;
}

Verdict entails(Formula f1, Formula f2, const Alphabet& alphabet, SearchCaps caps) {
  Verdict s = sat(Formula::conj(f1, Formula::negate(f2)), alphabet, caps);
  Verdict v;
  v.problem = "entails";
  v.complete = s.complete;
  v.value = s.complete && !s.value;
  if (s.value) v.witness = s.witness;
  v.stats = s.stats;
  v.note = s.note;
  return v;
}

Verdict logically_equiv(Formula f1, Formula f2, const Alphabet& alphabet, SearchCaps caps) {
  Verdict fwd = entails(f1, f2, alphabet, caps);
  Verdict v = fwd;
  v.problem = "equiv";
  if (fwd.value) {
    Verdict bwd = entails(f2, f1, alphabet, caps);
    v.value = bwd.value;
    v.complete = bwd.complete;
    v.witness = bwd.witness;
    v.stats.search_nodes += bwd.stats.search_nodes;
    v.stats.sat_calls += bwd.stats.sat_calls;
    v.stats.runtime_ms += bwd.stats.runtime_ms;
  }
  return v;
}

}  // namespace nestsim
