#include "nestsim/tableau.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace nestsim {

LabelSet::LabelSet(std::vector<Formula> fs) : fs_(std::move(fs)) {
  std::sort(fs_.begin(), fs_.end());
  fs_.erase(std::unique(fs_.begin(), fs_.end()), fs_.end());
}

bool LabelSet::contains(Formula f) const { return std::binary_search(fs_.begin(), fs_.end(), f); }

LabelSet LabelSet::with(Formula f) const {
  if (contains(f)) return *this;
  LabelSet out = *this;
  out.fs_.insert(std::lower_bound(out.fs_.begin(), out.fs_.end(), f), f);
  return out;
}

LabelSet LabelSet::merged(const LabelSet& other) const {
  std::vector<Formula> all;
  all.reserve(fs_.size() + other.fs_.size());
  std::set_union(fs_.begin(), fs_.end(), other.fs_.begin(), other.fs_.end(), std::back_inserter(all));
  LabelSet out;
  out.fs_ = std::move(all);
  return out;
}

bool LabelSet::subset_of(const LabelSet& other) const {
  return std::includes(other.fs_.begin(), other.fs_.end(), fs_.begin(), fs_.end());
}

std::size_t LabelSet::hash() const {
  std::size_t h = fs_.size();
  for (Formula f : fs_) h = h * 0x9E3779B97F4A7C15ull + f.id();
  return h;
}

std::string LabelSet::to_string() const {
  std::ostringstream os;
  os << '{';
  for (std::size_t i = 0; i < fs_.size(); ++i) {
    if (i) os << ", ";
    os << fs_[i];
  }
  os << '}';
  return os.str();
}

bool is_elementary(Formula f) {
  switch (f.op()) {
    case Op::Tt:
    case Op::Ff:
    case Op::Diamond:
    case Op::Box:
      return true;
    case Op::Not:
      return f.body().is_modal();
    default:
      return false;
  }
}

namespace {

Formula complement(Formula f) { return f.is(Op::Not) ? f.body() : Formula::negate(f); }

enum class Shape { Elementary, Conjunctive, Disjunctive };

// Parts of a non-elementary formula under the propositional rules, with
// negation pushed one level: !(x&y) splits, !(x|y) conjoins, !!x is x.
Shape shape(Formula f, Formula& x, Formula& y) {
  switch (f.op()) {
    case Op::And:
      x = f.lhs();
      y = f.rhs();
      return Shape::Conjunctive;
    case Op::Or:
      x = f.lhs();
      y = f.rhs();
      return Shape::Disjunctive;
    case Op::Not: {
      Formula g = f.body();
      switch (g.op()) {
        case Op::Tt: x = y = Formula::ff(); return Shape::Conjunctive;
        case Op::Ff: x = y = Formula::tt(); return Shape::Conjunctive;
        case Op::Not: x = y = g.body(); return Shape::Conjunctive;
        case Op::And:
          x = Formula::negate(g.lhs());
          y = Formula::negate(g.rhs());
          return Shape::Disjunctive;
        case Op::Or:
          x = Formula::negate(g.lhs());
          y = Formula::negate(g.rhs());
          return Shape::Conjunctive;
        default: return Shape::Elementary;
      }
    }
    default:
      return Shape::Elementary;
  }
}

void expand(std::vector<Formula> elem, std::vector<Formula> todo, std::set<LabelSet>& out) {
  while (!todo.empty()) {
    Formula f = todo.back();
    todo.pop_back();
    Formula x, y;
    switch (shape(f, x, y)) {
      case Shape::Elementary: {
        if (f.is(Op::Ff)) return;
        if (std::find(elem.begin(), elem.end(), f) != elem.end()) break;
        Formula c = complement(f);
        if (std::find(elem.begin(), elem.end(), c) != elem.end()) return;
        elem.push_back(f);
        break;
      }
      case Shape::Conjunctive:
        todo.push_back(y);
        todo.push_back(x);
        break;
      case Shape::Disjunctive: {
        auto left = todo;
        left.push_back(x);
        expand(elem, std::move(left), out);
        todo.push_back(y);
        expand(std::move(elem), std::move(todo), out);
        return;
      }
    }
  }
  out.insert(LabelSet(std::move(elem)));
}

bool holds_under(Formula f, const LabelSet& closed) {
  Formula x, y;
  switch (shape(f, x, y)) {
    case Shape::Conjunctive: return holds_under(x, closed) && holds_under(y, closed);
    case Shape::Disjunctive: return holds_under(x, closed) || holds_under(y, closed);
    case Shape::Elementary: return f.is(Op::Tt) || closed.contains(f);
  }
  return false;
}

void saturate_into(Formula f, const LabelSet& closed, std::vector<Formula>& out) {
  out.push_back(f);
  Formula x, y;
  if (shape(f, x, y) == Shape::Elementary) return;
  if (holds_under(x, closed)) saturate_into(x, closed, out);
  if (holds_under(y, closed)) saturate_into(y, closed, out);
}

}  // namespace

PropShape prop_shape(Formula f, Formula& x, Formula& y) {
  switch (shape(f, x, y)) {
    case Shape::Conjunctive: return PropShape::Conjunctive;
    case Shape::Disjunctive: return PropShape::Disjunctive;
    default: return PropShape::Elementary;
  }
}

LabelSet saturate(const LabelSet& initial, const LabelSet& closed) {
  std::vector<Formula> out(closed.begin(), closed.end());
  for (Formula f : initial) {
    if (holds_under(f, closed)) saturate_into(f, closed, out);
  }
  return LabelSet(std::move(out));
}

bool propositionally_consistent(const LabelSet& s) {
  for (Formula f : s) {
    if (f.is(Op::Ff)) return false;
    if (f.is(Op::Not) && s.contains(f.body())) return false;
  }
  return true;
}

std::vector<DiamondDemand> diamond_demands(const LabelSet& closed) {
  std::vector<DiamondDemand> out;
  for (Formula f : closed) {
    if (f.is(Op::Diamond)) {
      out.push_back({f.action(), f.body(), f});
    } else if (f.is(Op::Not) && f.body().is(Op::Box)) {
      out.push_back({f.body().action(), Formula::negate(f.body().body()), f});
    }
  }
  return out;
}

LabelSet box_successor(const LabelSet& closed, Action a) {
  std::vector<Formula> out;
  for (Formula f : closed) {
    if (f.is(Op::Box) && f.action() == a) {
      out.push_back(f.body());
    } else if (f.is(Op::Not) && f.body().is(Op::Diamond) && f.body().action() == a) {
      out.push_back(Formula::negate(f.body().body()));
    }
  }
  return LabelSet(std::move(out));
}

std::vector<LabelSet> propositional_closures(const LabelSet& t) {
  std::set<LabelSet> out;
  std::vector<Formula> todo(t.formulas().rbegin(), t.formulas().rend());
  expand({}, std::move(todo), out);
  return {out.begin(), out.end()};
}

bool is_hml_tableau(const HmlTableau& t) {
  if (t.label.size() != t.rel.size() || t.root >= t.label.size()) return false;
  for (std::size_t s = 0; s < t.label.size(); ++s) {
    const LabelSet& l = t.label[s];
    if (!propositionally_consistent(l)) return false;
    for (Formula f : l) {
      Formula x, y;
      Shape sh = shape(f, x, y);
      if (sh == Shape::Conjunctive && !(l.contains(x) && l.contains(y))) return false;
      if (sh == Shape::Disjunctive && !(l.contains(x) || l.contains(y))) return false;
    }
    for (const Edge& e : t.rel[s]) {
      if (e.target.index >= t.label.size()) return false;
      if (!box_successor(l, e.action).subset_of(t.label[e.target.index])) return false;
    }
    for (const auto& d : diamond_demands(l)) {
      bool witnessed = std::any_of(t.rel[s].begin(), t.rel[s].end(), [&](const Edge& e) {
        return e.action == d.action && t.label[e.target.index].contains(d.body);
      });
      if (!witnessed) return false;
    }
  }
  return true;
}

Process tableau_to_lts(const HmlTableau& t, const Alphabet& alphabet) {
  Process p{Lts(alphabet), StateId{t.root}};
  for (std::size_t s = 0; s < t.label.size(); ++s) p.lts.add_state("t" + std::to_string(s));
  for (std::size_t s = 0; s < t.rel.size(); ++s) {
    for (const Edge& e : t.rel[s]) p.lts.add_transition(StateId{static_cast<std::uint32_t>(s)}, e.action, e.target);
  }
  return p;
}

void Tableau::charge() {
  ++stats_.search_nodes;
  if (caps_.max_nodes && stats_.search_nodes > caps_.max_nodes) throw CapExceeded("tableau node cap exceeded");
}

const std::vector<LabelSet>& Tableau::closures(const LabelSet& s) {
  if (auto it = closures_.find(s); it != closures_.end()) return it->second;
  charge();
  return closures_.emplace(s, propositional_closures(s)).first->second;
}

bool Tableau::closure_satisfiable(const LabelSet& closed) {
  if (auto it = closed_sat_.find(closed); it != closed_sat_.end()) return it->second;
  bool ok = true;
  for (const auto& d : diamond_demands(closed)) {
    if (!satisfiable(box_successor(closed, d.action).with(d.body))) {
      ok = false;
      break;
    }
  }
  closed_sat_.emplace(closed, ok);
  return ok;
}

bool Tableau::satisfiable(const LabelSet& s) {
  ++stats_.sat_calls;
  if (auto it = sat_.find(s); it != sat_.end()) return it->second;
  bool ok = false;
  // Copy: recursive calls may rehash the closure table.
  std::vector<LabelSet> cs = closures(s);
  for (const LabelSet& c : cs) {
    if (closure_satisfiable(c)) {
      ok = true;
      break;
    }
  }
  sat_.emplace(s, ok);
  return ok;
}

std::vector<LabelSet> Tableau::satisfiable_closures(const LabelSet& s) {
  std::vector<LabelSet> out;
  std::vector<LabelSet> cs = closures(s);
  for (const LabelSet& c : cs) {
    if (closure_satisfiable(c)) out.push_back(c);
  }
  return out;
}

int Tableau::build_rec(const LabelSet& s, HmlTableau& t) {
  std::vector<LabelSet> cs = closures(s);
  for (const LabelSet& c : cs) {
    if (!closure_satisfiable(c)) continue;
    int me = static_cast<int>(t.label.size());
    t.label.push_back(saturate(s, c));
    t.rel.emplace_back();
    for (const auto& d : diamond_demands(c)) {
      int child = build_rec(box_successor(c, d.action).with(d.body), t);
      t.rel[me].push_back({d.action, StateId{static_cast<std::uint32_t>(child)}});
    }
    return me;
  }
  throw std::logic_error("build on unsatisfiable label");
}

std::optional<HmlTableau> Tableau::build(const LabelSet& s) {
  if (!satisfiable(s)) return std::nullopt;
  HmlTableau t;
  t.root = static_cast<std::uint32_t>(build_rec(s, t));
  return t;
}

namespace {

std::optional<ProcessTerm> pure_diamond_model(Formula f) {
  switch (f.op()) {
    case Op::Tt: return ProcessTerm::nil();
    case Op::Ff: return std::nullopt;
    case Op::And: {
      auto x = pure_diamond_model(f.lhs());
      if (!x) return std::nullopt;
      auto y = pure_diamond_model(f.rhs());
      if (!y) return std::nullopt;
      // Both sides are preserved by adding summands.
      if (x->kind() == ProcessTerm::Kind::Nil) return y;
      if (y->kind() == ProcessTerm::Kind::Nil) return x;
      return ProcessTerm::sum(*x, *y);
    }
    case Op::Or: {
      if (auto x = pure_diamond_model(f.lhs())) return x;
      return pure_diamond_model(f.rhs());
    }
    case Op::Diamond: {
      auto x = pure_diamond_model(f.body());
      if (!x) return std::nullopt;
      return ProcessTerm::prefix(f.action(), *x);
    }
    default:
      throw PreconditionError("not a pure diamond formula");
  }
}

}  // namespace

std::optional<Process> sat_pure_diamond(Formula f, const Alphabet& alphabet) {
  auto t = pure_diamond_model(f);
  if (!t) return std::nullopt;
  return term_to_lts(*t, alphabet);
}

Verdict sat(Formula f, const Alphabet& alphabet, SearchCaps caps) {
  Stopwatch clock;
  Verdict v;
  v.problem = "sat";
  Alphabet full = alphabet.merged(Alphabet(actions_of(f)));
  if (is_pure_diamond(f)) {
    v.witness = sat_pure_diamond(f, full);
    v.value = v.witness.has_value();
    v.note = "pure-diamond shortcut";
    v.stats.runtime_ms = clock.elapsed_ms();
    return v;
  }
  Tableau tab(caps);
  try {
    auto t = tab.build(LabelSet{f});
    v.value = t.has_value();
    if (t) v.witness = tableau_to_lts(*t, full);
  } catch (const CapExceeded& e) {
    v.value = false;
    v.complete = false;
    v.note = e.what();
  }
  v.stats = tab.stats();
  v.stats.runtime_ms = clock.elapsed_ms();
  return v;
}

}  // namespace nestsim
