#include "nestsim/syntax.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <unordered_map>

namespace nestsim {

ParseError::ParseError(std::size_t offset, const std::string& what)
    : std::runtime_error("parse error at offset " + std::to_string(offset) + ": " + what),
      offset_(offset) {}

UnknownActionError::UnknownActionError(std::string action, std::size_t offset)
    : std::runtime_error("unknown action '" + action + "' at offset " + std::to_string(offset)),
      action_(std::move(action)),
      offset_(offset) {}

namespace {

struct ActionTable {
  std::mutex mu;
  std::deque<std::string> names{""};
  std::unordered_map<std::string, std::uint32_t> ids;
};

ActionTable& actions() {
  static ActionTable table;
  return table;
}

}  // namespace

bool Action::valid_name(std::string_view name) {
  if (name.empty() || name[0] < 'a' || name[0] > 'z') return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
  });
}

Action Action::named(std::string_view name) {
  if (!valid_name(name)) throw std::invalid_argument("invalid action name '" + std::string(name) + "'");
  auto& t = actions();
  std::lock_guard lock(t.mu);
  auto [it, fresh] = t.ids.try_emplace(std::string(name), static_cast<std::uint32_t>(t.names.size()));
  if (fresh) t.names.emplace_back(name);
  return Action(it->second);
}

const std::string& Action::name() const {
  auto& t = actions();
  std::lock_guard lock(t.mu);
  return t.names[id_];
}

bool operator<(Action x, Action y) {
  if (x == y) return false;
  return x.name() < y.name();
}

Alphabet::Alphabet(std::initializer_list<Action> as) : Alphabet(std::vector<Action>(as)) {}

Alphabet::Alphabet(std::vector<Action> as) : actions_(std::move(as)) {
  std::sort(actions_.begin(), actions_.end());
  actions_.erase(std::unique(actions_.begin(), actions_.end()), actions_.end());
}

Alphabet Alphabet::from_names(const std::vector<std::string>& names) {
  std::vector<Action> as;
  for (const auto& n : names) as.push_back(Action::named(n));
  return Alphabet(std::move(as));
}

Alphabet Alphabet::parse_list(std::string_view list) {
  std::vector<std::string> names;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) names.push_back(cur);
    cur.clear();
  };
  for (char c : list) {
    if (c == ',') {
      flush();
    } else if (c != ' ' && c != '\t') {
      cur.push_back(c);
    }
  }
  flush();
  return from_names(names);
}

bool Alphabet::contains(Action a) const {
  return std::find(actions_.begin(), actions_.end(), a) != actions_.end();
}

std::size_t Alphabet::index_of(Action a) const {
  auto it = std::find(actions_.begin(), actions_.end(), a);
  if (it == actions_.end()) throw std::out_of_range("action not in alphabet: " + a.name());
  return static_cast<std::size_t>(it - actions_.begin());
}

Alphabet Alphabet::merged(const Alphabet& other) const {
  std::vector<Action> all = actions_;
  all.insert(all.end(), other.actions_.begin(), other.actions_.end());
  return Alphabet(std::move(all));
}

std::string Alphabet::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < actions_.size(); ++i) {
    if (i) out += ",";
    out += actions_[i].name();
  }
  return out;
}

namespace detail {

struct FormulaNode {
  Op op;
  Action action;
  const FormulaNode* lhs;
  const FormulaNode* rhs;
  std::uint32_t id;
  std::uint32_t size;
  int md;
};

}  // namespace detail

namespace {

using detail::FormulaNode;

struct NodeKey {
  Op op;
  std::uint32_t action;
  const FormulaNode* lhs;
  const FormulaNode* rhs;
  bool operator==(const NodeKey&) const = default;
};

struct NodeKeyHash {
  std::size_t operator()(const NodeKey& k) const noexcept {
    std::size_t h = static_cast<std::size_t>(k.op);
    h = h * 1000003u ^ k.action;
    h = h * 1000003u ^ reinterpret_cast<std::uintptr_t>(k.lhs);
    h = h * 1000003u ^ reinterpret_cast<std::uintptr_t>(k.rhs);
    return h;
  }
};

struct FormulaTable {
  std::mutex mu;
  std::deque<FormulaNode> nodes;
  std::unordered_map<NodeKey, const FormulaNode*, NodeKeyHash> index;

  const FormulaNode* intern(Op op, Action a, const FormulaNode* l, const FormulaNode* r) {
    std::lock_guard lock(mu);
    NodeKey key{op, a.id(), l, r};
    if (auto it = index.find(key); it != index.end()) return it->second;
    std::uint32_t sz = 1 + (l ? l->size : 0) + (r ? r->size : 0);
    int depth = std::max(l ? l->md : 0, r ? r->md : 0);
    if (op == Op::Diamond || op == Op::Box) depth = 1 + l->md;
    nodes.push_back(FormulaNode{op, a, l, r, static_cast<std::uint32_t>(nodes.size()), sz, depth});
    const FormulaNode* n = &nodes.back();
    index.emplace(key, n);
    return n;
  }
};

FormulaTable& formulas() {
  static FormulaTable table;
  return table;
}

}  // namespace

Formula::Formula() : Formula(tt()) {}

Formula Formula::tt() {
  static const FormulaNode* n = formulas().intern(Op::Tt, Action(), nullptr, nullptr);
  return Formula(n);
}

Formula Formula::ff() {
  static const FormulaNode* n = formulas().intern(Op::Ff, Action(), nullptr, nullptr);
  return Formula(n);
}

Formula Formula::conj(Formula x, Formula y) { return Formula(formulas().intern(Op::And, Action(), x.n_, y.n_)); }
Formula Formula::disj(Formula x, Formula y) { return Formula(formulas().intern(Op::Or, Action(), x.n_, y.n_)); }
Formula Formula::diamond(Action a, Formula b) { return Formula(formulas().intern(Op::Diamond, a, b.n_, nullptr)); }
Formula Formula::box(Action a, Formula b) { return Formula(formulas().intern(Op::Box, a, b.n_, nullptr)); }
Formula Formula::negate(Formula b) { return Formula(formulas().intern(Op::Not, Action(), b.n_, nullptr)); }

Op Formula::op() const { return n_->op; }
Action Formula::action() const { return n_->action; }
Formula Formula::lhs() const { return Formula(n_->lhs); }
Formula Formula::rhs() const { return Formula(n_->rhs); }
std::uint32_t Formula::id() const { return n_->id; }
std::size_t Formula::size() const { return n_->size; }
int Formula::md() const { return n_->md; }

Formula conj_all(const std::vector<Formula>& xs) {
  if (xs.empty()) return Formula::tt();
  Formula acc = xs.front();
  for (std::size_t i = 1; i < xs.size(); ++i) acc = Formula::conj(acc, xs[i]);
  return acc;
}

Formula disj_all(const std::vector<Formula>& xs) {
  if (xs.empty()) return Formula::ff();
  Formula acc = xs.front();
  for (std::size_t i = 1; i < xs.size(); ++i) acc = Formula::disj(acc, xs[i]);
  return acc;
}

Formula zero_formula(const Alphabet& alphabet) {
  std::vector<Formula> boxes;
  for (Action a : alphabet) boxes.push_back(Formula::box(a, Formula::ff()));
  return conj_all(boxes);
}

int md(Formula f) { return f.md(); }
std::size_t size(Formula f) { return f.size(); }

std::vector<Formula> subformulae(Formula f) {
  std::set<Formula> seen;
  std::vector<Formula> stack{f};
  while (!stack.empty()) {
    Formula g = stack.back();
    stack.pop_back();
    if (!seen.insert(g).second) continue;
    switch (g.op()) {
      case Op::Tt:
      case Op::Ff:
        break;
      case Op::And:
      case Op::Or:
        stack.push_back(g.lhs());
        stack.push_back(g.rhs());
        break;
      default:
        stack.push_back(g.body());
    }
  }
  return {seen.begin(), seen.end()};
}

std::vector<Action> actions_of(Formula f) {
  std::vector<Action> out;
  for (Formula g : subformulae(f)) {
    if (g.is_modal()) out.push_back(g.action());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

Formula smart_not(Formula x) {
  switch (x.op()) {
    case Op::Tt: return Formula::ff();
    case Op::Ff: return Formula::tt();
    case Op::Not: return x.body();
    default: return Formula::negate(x);
  }
}

int ns_level(Formula f, std::unordered_map<Formula, int>& memo) {
  if (auto it = memo.find(f); it != memo.end()) return it->second;
  int level = 1;
  switch (f.op()) {
    case Op::Tt:
    case Op::Ff:
      break;
    case Op::And:
    case Op::Or:
      level = std::max(ns_level(f.lhs(), memo), ns_level(f.rhs(), memo));
      break;
    case Op::Diamond:
      level = ns_level(f.body(), memo);
      break;
    case Op::Not:
      level = ns_level(f.body(), memo) + 1;
      break;
    case Op::Box:
      throw std::logic_error("box survived desugaring");
  }
  memo.emplace(f, level);
  return level;
}

}  // namespace

Formula desugar_box(Formula f) {
  switch (f.op()) {
    case Op::Tt:
    case Op::Ff:
      return f;
    case Op::And: return Formula::conj(desugar_box(f.lhs()), desugar_box(f.rhs()));
    case Op::Or: return Formula::disj(desugar_box(f.lhs()), desugar_box(f.rhs()));
    case Op::Diamond: return Formula::diamond(f.action(), desugar_box(f.body()));
    case Op::Box: return smart_not(Formula::diamond(f.action(), smart_not(desugar_box(f.body()))));
    case Op::Not: return smart_not(desugar_box(f.body()));
  }
  return f;
}

FragmentTag fragment_level(Formula f) {
  std::unordered_map<Formula, int> memo;
  return FragmentTag::ns(ns_level(desugar_box(f), memo));
}

namespace {

// Level of f, or of !f when negated, with negation moved through & and |.
int dm_level(Formula f, bool negated, std::map<std::pair<std::uint32_t, bool>, int>& memo) {
  auto key = std::make_pair(f.id(), negated);
  if (auto it = memo.find(key); it != memo.end()) return it->second;
  int r = 1;
  switch (f.op()) {
    case Op::Tt:
    case Op::Ff:
      r = 1;
      break;
    case Op::And:
    case Op::Or:
      r = std::max(dm_level(f.lhs(), negated, memo), dm_level(f.rhs(), negated, memo));
      break;
    case Op::Diamond:
      // !<a>x needs one negation over <a>x.
      r = dm_level(f.body(), false, memo) + (negated ? 1 : 0);
      break;
    case Op::Box:
      // [a]x is !<a>!x and ![a]x is <a>!x.
      r = dm_level(f.body(), true, memo) + (negated ? 0 : 1);
      break;
    case Op::Not:
      r = dm_level(f.body(), !negated, memo);
      break;
  }
  memo.emplace(key, r);
  return r;
}

}  // namespace

FragmentTag rewritten_fragment_level(Formula f) {
  std::map<std::pair<std::uint32_t, bool>, int> memo;
  return FragmentTag::ns(dm_level(f, false, memo));
}

bool is_pure_diamond(Formula f) {
  switch (f.op()) {
    case Op::Tt:
    case Op::Ff:
      return true;
    case Op::And:
    case Op::Or:
      return is_pure_diamond(f.lhs()) && is_pure_diamond(f.rhs());
    case Op::Diamond:
      return is_pure_diamond(f.body());
    default:
      return false;
  }
}

namespace {

Formula nnf(Formula f, bool negated) {
  switch (f.op()) {
    case Op::Tt: return negated ? Formula::ff() : f;
    case Op::Ff: return negated ? Formula::tt() : f;
    case Op::And:
      return negated ? Formula::disj(nnf(f.lhs(), true), nnf(f.rhs(), true))
                     : Formula::conj(nnf(f.lhs(), false), nnf(f.rhs(), false));
    case Op::Or:
      return negated ? Formula::conj(nnf(f.lhs(), true), nnf(f.rhs(), true))
                     : Formula::disj(nnf(f.lhs(), false), nnf(f.rhs(), false));
    case Op::Diamond:
      return negated ? Formula::box(f.action(), nnf(f.body(), true))
                     : Formula::diamond(f.action(), nnf(f.body(), false));
    case Op::Box:
      return negated ? Formula::diamond(f.action(), nnf(f.body(), true))
                     : Formula::box(f.action(), nnf(f.body(), false));
    case Op::Not: return nnf(f.body(), !negated);
  }
  return f;
}

// Precedence: 0 = or, 1 = and, 2 = unary/atom.
int precedence(Formula f) {
  switch (f.op()) {
    case Op::Or: return 0;
    case Op::And: return 1;
    default: return 2;
  }
}

void print(std::ostream& os, Formula f, int min_prec) {
  bool parens = precedence(f) < min_prec;
  if (parens) os << '(';
  switch (f.op()) {
    case Op::Tt: os << "tt"; break;
    case Op::Ff: os << "ff"; break;
    case Op::And:
      print(os, f.lhs(), 1);
      os << " & ";
      print(os, f.rhs(), 2);
      break;
    case Op::Or:
      print(os, f.lhs(), 0);
      os << " | ";
      print(os, f.rhs(), 1);
      break;
    case Op::Diamond:
      os << '<' << f.action().name() << '>';
      print(os, f.body(), 2);
      break;
    case Op::Box:
      os << '[' << f.action().name() << ']';
      print(os, f.body(), 2);
      break;
    case Op::Not:
      os << '!';
      print(os, f.body(), 2);
      break;
  }
  if (parens) os << ')';
}

}  // namespace

Formula to_nnf(Formula f) { return nnf(f, false); }

std::string to_string(Formula f) {
  std::ostringstream os;
  print(os, f, 0);
  return os.str();
}

std::ostream& operator<<(std::ostream& os, Formula f) {
  print(os, f, 0);
  return os;
}

}  // namespace nestsim
