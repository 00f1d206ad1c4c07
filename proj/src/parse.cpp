#include <sstream>

#include "nestsim/syntax.hpp"

namespace nestsim {

struct ProcessTerm::Node {
  Kind kind;
  Action action;
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;
  int depth;
};

namespace {

class Lexer {
 public:
  Lexer(std::string_view text, const Alphabet* alphabet) : text_(text), alphabet_(alphabet) {}

  void skip_ws() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' || text_[pos_] == '\r'))
      ++pos_;
  }

  bool at_end() {
    skip_ws();
    return pos_ >= text_.size();
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  bool accept(char c) {
    if (peek() != c) return false;
    ++pos_;
    return true;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  bool accept_word(std::string_view w) {
    skip_ws();
    if (text_.substr(pos_, w.size()) != w) return false;
    std::size_t end = pos_ + w.size();
    if (end < text_.size() && is_ident_char(text_[end])) return false;
    pos_ = end;
    return true;
  }

  Action action() {
    skip_ws();
    std::size_t start = pos_;
    if (pos_ >= text_.size() || text_[pos_] < 'a' || text_[pos_] > 'z') fail("expected action");
    while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
    std::string name(text_.substr(start, pos_ - start));
    Action a = Action::named(name);
    if (alphabet_ && !alphabet_->contains(a)) throw UnknownActionError(name, start);
    return a;
  }

  [[noreturn]] void fail(const std::string& what) {
    skip_ws();
    throw ParseError(pos_, what);
  }

 private:
  static bool is_ident_char(char c) { return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_'; }

  std::string_view text_;
  const Alphabet* alphabet_;
  std::size_t pos_ = 0;
};

class FormulaParser {
 public:
  explicit FormulaParser(Lexer& lex) : lex_(lex) {}

  Formula disjunction() {
    Formula acc = conjunction();
    while (lex_.accept('|')) acc = Formula::disj(acc, conjunction());
    return acc;
  }

 private:
  Formula conjunction() {
    Formula acc = unary();
    while (lex_.accept('&')) acc = Formula::conj(acc, unary());
    return acc;
  }

  Formula unary() {
    if (lex_.accept('!')) return Formula::negate(unary());
    if (lex_.accept('<')) {
      Action a = lex_.action();
      lex_.expect('>');
      return Formula::diamond(a, unary());
    }
    if (lex_.accept('[')) {
      Action a = lex_.action();
      lex_.expect(']');
      return Formula::box(a, unary());
    }
    if (lex_.accept('(')) {
      Formula f = disjunction();
      lex_.expect(')');
      return f;
    }
    if (lex_.accept_word("tt")) return Formula::tt();
    if (lex_.accept_word("ff")) return Formula::ff();
    lex_.fail("expected formula");
  }

  Lexer& lex_;
};

class ProcessParser {
 public:
  explicit ProcessParser(Lexer& lex) : lex_(lex) {}

  ProcessTerm sum() {
    ProcessTerm acc = prefix();
    while (lex_.accept('+')) acc = ProcessTerm::sum(acc, prefix());
    return acc;
  }

 private:
  ProcessTerm prefix() {
    if (lex_.accept('0')) return ProcessTerm::nil();
    if (lex_.accept('(')) {
      ProcessTerm p = sum();
      lex_.expect(')');
      return p;
    }
    char c = lex_.peek();
    if (c < 'a' || c > 'z') lex_.fail("expected process");
    Action a = lex_.action();
    lex_.expect('.');
    return ProcessTerm::prefix(a, prefix());
  }

  Lexer& lex_;
};

Formula parse_formula_impl(std::string_view text, const Alphabet* alphabet) {
  Lexer lex(text, alphabet);
  Formula f = FormulaParser(lex).disjunction();
  if (!lex.at_end()) lex.fail("unexpected trailing input");
  return f;
}

ProcessTerm parse_process_impl(std::string_view text, const Alphabet* alphabet) {
  Lexer lex(text, alphabet);
  ProcessTerm p = ProcessParser(lex).sum();
  if (!lex.at_end()) lex.fail("unexpected trailing input");
  return p;
}

void print(std::ostream& os, const ProcessTerm& p, bool in_prefix) {
  switch (p.kind()) {
    case ProcessTerm::Kind::Nil:
      os << '0';
      break;
    case ProcessTerm::Kind::Prefix:
      os << p.action().name() << '.';
      print(os, p.lhs(), true);
      break;
    case ProcessTerm::Kind::Sum:
      if (in_prefix) os << '(';
      print(os, p.lhs(), false);
      os << " + ";
      // Sum is left-associative; a right operand that is itself a sum needs brackets.
      print(os, p.rhs(), true);
      if (in_prefix) os << ')';
      break;
  }
}

}  // namespace

Formula parse_formula(std::string_view text) { return parse_formula_impl(text, nullptr); }
Formula parse_formula(std::string_view text, const Alphabet& alphabet) { return parse_formula_impl(text, &alphabet); }
ProcessTerm parse_process(std::string_view text) { return parse_process_impl(text, nullptr); }
ProcessTerm parse_process(std::string_view text, const Alphabet& alphabet) { return parse_process_impl(text, &alphabet); }

namespace {

const std::shared_ptr<const ProcessTerm::Node>& nil_node() {
  static const std::shared_ptr<const ProcessTerm::Node> n = [] {
    auto node = std::make_shared<ProcessTerm::Node>();
    node->kind = ProcessTerm::Kind::Nil;
    node->depth = 0;
    return std::shared_ptr<const ProcessTerm::Node>(node);
  }();
  return n;
}

}  // namespace

ProcessTerm::ProcessTerm() : n_(nil_node()) {}

ProcessTerm ProcessTerm::nil() { return ProcessTerm(); }

ProcessTerm ProcessTerm::prefix(Action a, ProcessTerm p) {
  auto node = std::make_shared<Node>();
  node->kind = Kind::Prefix;
  node->action = a;
  node->depth = 1 + p.depth();
  node->lhs = std::move(p.n_);
  return ProcessTerm(std::move(node));
}

ProcessTerm ProcessTerm::sum(ProcessTerm p, ProcessTerm q) {
  auto node = std::make_shared<Node>();
  node->kind = Kind::Sum;
  node->depth = std::max(p.depth(), q.depth());
  node->lhs = std::move(p.n_);
  node->rhs = std::move(q.n_);
  return ProcessTerm(std::move(node));
}

ProcessTerm::Kind ProcessTerm::kind() const { return n_->kind; }
Action ProcessTerm::action() const { return n_->action; }
ProcessTerm ProcessTerm::lhs() const { return ProcessTerm(n_->lhs); }
ProcessTerm ProcessTerm::rhs() const { return ProcessTerm(n_->rhs); }
int ProcessTerm::depth() const { return n_->depth; }

bool operator==(const ProcessTerm& x, const ProcessTerm& y) {
  if (x.n_ == y.n_) return true;
  if (x.kind() != y.kind()) return false;
  switch (x.kind()) {
    case ProcessTerm::Kind::Nil: return true;
    case ProcessTerm::Kind::Prefix: return x.action() == y.action() && x.lhs() == y.lhs();
    case ProcessTerm::Kind::Sum: return x.lhs() == y.lhs() && x.rhs() == y.rhs();
  }
  return false;
}

std::string to_string(const ProcessTerm& p) {
  std::ostringstream os;
  print(os, p, false);
  return os.str();
}

std::ostream& operator<<(std::ostream& os, const ProcessTerm& p) {
  print(os, p, false);
  return os;
}

}  // namespace nestsim
