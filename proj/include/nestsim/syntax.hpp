#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nestsim {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t offset, const std::string& what);
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class UnknownActionError : public std::runtime_error {
 public:
  UnknownActionError(std::string action, std::size_t offset);
  const std::string& action() const { return action_; }
  std::size_t offset() const { return offset_; }

 private:
  std::string action_;
  std::size_t offset_;
};

// Interned action symbol. Equal names give equal ids.
class Action {
 public:
  Action() = default;
  static Action named(std::string_view name);
  static bool valid_name(std::string_view name);

  const std::string& name() const;
  std::uint32_t id() const { return id_; }
  bool valid() const { return id_ != 0; }

  friend bool operator==(Action x, Action y) { return x.id_ == y.id_; }
  friend bool operator!=(Action x, Action y) { return x.id_ != y.id_; }
  // Orders by name so that iteration over alphabets is reproducible.
  friend bool operator<(Action x, Action y);

 private:
  explicit Action(std::uint32_t id) : id_(id) {}
  std::uint32_t id_ = 0;
};

class Alphabet {
 public:
  Alphabet() = default;
  Alphabet(std::initializer_list<Action> actions);
  explicit Alphabet(std::vector<Action> actions);
  static Alphabet from_names(const std::vector<std::string>& names);
  // "a,b,c" with optional whitespace.
  static Alphabet parse_list(std::string_view list);

  bool contains(Action a) const;
  std::size_t size() const { return actions_.size(); }
  bool empty() const { return actions_.empty(); }
  // Position of a in name order; requires contains(a).
  std::size_t index_of(Action a) const;
  Action operator[](std::size_t i) const { return actions_[i]; }
  auto begin() const { return actions_.begin(); }
  auto end() const { return actions_.end(); }
  Alphabet merged(const Alphabet& other) const;
  std::string to_string() const;

  friend bool operator==(const Alphabet& x, const Alphabet& y) { return x.actions_ == y.actions_; }

 private:
  std::vector<Action> actions_;
};

enum class Op : std::uint8_t { Tt, Ff, And, Or, Diamond, Box, Not };

namespace detail {
struct FormulaNode;
}

// Hash-consed HML formula. Structurally equal formulae share one node, so
// equality is pointer equality and ordering is by creation id.
class Formula {
 public:
  Formula();  // tt

  static Formula tt();
  static Formula ff();
  static Formula conj(Formula x, Formula y);
  static Formula disj(Formula x, Formula y);
  static Formula diamond(Action a, Formula body);
  static Formula box(Action a, Formula body);
  static Formula negate(Formula body);

  Op op() const;
  Action action() const;
  // Body of a modal or negated formula, left operand of a binary one.
  Formula lhs() const;
  Formula rhs() const;
  Formula body() const { return lhs(); }

  std::uint32_t id() const;
  std::size_t size() const;
  int md() const;

  bool is(Op o) const { return op() == o; }
  bool is_modal() const { return op() == Op::Diamond || op() == Op::Box; }

  friend bool operator==(Formula x, Formula y) { return x.n_ == y.n_; }
  friend bool operator!=(Formula x, Formula y) { return x.n_ != y.n_; }
  friend bool operator<(Formula x, Formula y) { return x.id() < y.id(); }

 private:
  explicit Formula(const detail::FormulaNode* n) : n_(n) {}
  const detail::FormulaNode* n_;
};

Formula conj_all(const std::vector<Formula>& xs);
Formula disj_all(const std::vector<Formula>& xs);
// The deadlock formula: conjunction of [a]ff over the alphabet.
Formula zero_formula(const Alphabet& alphabet);

int md(Formula f);
std::size_t size(Formula f);
// All subterms including f, ordered by id.
std::vector<Formula> subformulae(Formula f);
std::vector<Action> actions_of(Formula f);

struct FragmentTag {
  enum class Kind { NS, BSOnly };
  Kind kind = Kind::NS;
  int level = 1;

  static FragmentTag ns(int n) { return {Kind::NS, n}; }
  friend bool operator==(const FragmentTag& x, const FragmentTag& y) {
    return x.kind == y.kind && x.level == y.level;
  }
};

// [a]x becomes !<a>!x, double negations cancel, and !tt / !ff fold to ff / tt.
Formula desugar_box(Formula f);
FragmentTag fragment_level(Formula f);
// Least level reachable by also moving negation through & and | (De Morgan),
// e.g. [a]([a]ff & [b]ff) is NS(4) syntactically but NS(2) here.
FragmentTag rewritten_fragment_level(Formula f);
// True when f uses only tt, ff, &, | and <a> with no rewriting.
bool is_pure_diamond(Formula f);
// Negation normal form: negation only disappears, never remains.
Formula to_nnf(Formula f);

std::string to_string(Formula f);
std::ostream& operator<<(std::ostream& os, Formula f);

Formula parse_formula(std::string_view text);
Formula parse_formula(std::string_view text, const Alphabet& alphabet);

class ProcessTerm {
 public:
  enum class Kind : std::uint8_t { Nil, Prefix, Sum };

  ProcessTerm();  // 0
  static ProcessTerm nil();
  static ProcessTerm prefix(Action a, ProcessTerm p);
  static ProcessTerm sum(ProcessTerm p, ProcessTerm q);

  Kind kind() const;
  Action action() const;
  ProcessTerm lhs() const;
  ProcessTerm rhs() const;
  // Syntactic depth: longest prefix chain.
  int depth() const;

  friend bool operator==(const ProcessTerm& x, const ProcessTerm& y);

  struct Node;

 private:
  explicit ProcessTerm(std::shared_ptr<const Node> n) : n_(std::move(n)) {}
  std::shared_ptr<const Node> n_;
};

std::string to_string(const ProcessTerm& p);
std::ostream& operator<<(std::ostream& os, const ProcessTerm& p);

ProcessTerm parse_process(std::string_view text);
ProcessTerm parse_process(std::string_view text, const Alphabet& alphabet);

}  // namespace nestsim

template <>
struct std::hash<nestsim::Formula> {
  std::size_t operator()(nestsim::Formula f) const noexcept { return f.id(); }
};

template <>
struct std::hash<nestsim::Action> {
  std::size_t operator()(nestsim::Action a) const noexcept { return a.id(); }
};
