#include "nestsim/lts.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>
#include <unordered_map>

namespace nestsim {

FormatError::FormatError(std::size_t line, const std::string& what)
    : std::runtime_error("format error at line " + std::to_string(line) + ": " + what), line_(line) {}

StateId Lts::add_state(std::string name) {
  StateId s{static_cast<std::uint32_t>(out_.size())};
  if (name.empty()) name = "s" + std::to_string(s.index);
  out_.emplace_back();
  names_.push_back(std::move(name));
  return s;
}

void Lts::add_transition(StateId source, Action a, StateId target) {
  if (!has_state(source) || !has_state(target)) throw std::out_of_range("transition endpoint not in LTS");
  if (!alphabet_.contains(a)) throw std::invalid_argument("label outside alphabet: " + a.name());
  auto& es = out_[source.index];
  auto key = [](const Edge& e) { return std::pair(e.action.id(), e.target.index); };
  Edge e{a, target};
  auto it = std::lower_bound(es.begin(), es.end(), e, [&](const Edge& x, const Edge& y) { return key(x) < key(y); });
  if (it != es.end() && key(*it) == key(e)) return;
  es.insert(it, e);
}

std::size_t Lts::num_transitions() const {
  std::size_t n = 0;
  for (const auto& es : out_) n += es.size();
  return n;
}

std::vector<StateId> Lts::successors(StateId s, Action a) const {
  std::vector<StateId> out;
  for (const Edge& e : edges(s)) {
    if (e.action == a) out.push_back(e.target);
  }
  return out;
}

std::vector<Transition> Lts::transitions() const {
  std::vector<Transition> ts;
  for (std::uint32_t i = 0; i < out_.size(); ++i) {
    for (const Edge& e : out_[i]) ts.push_back({StateId{i}, e.action, e.target});
  }
  return ts;
}

std::vector<StateId> Lts::states() const {
  std::vector<StateId> ss(out_.size());
  for (std::uint32_t i = 0; i < ss.size(); ++i) ss[i] = StateId{i};
  return ss;
}

namespace {

void collect_actions(const ProcessTerm& t, std::vector<Action>& out) {
  switch (t.kind()) {
    case ProcessTerm::Kind::Nil: break;
    case ProcessTerm::Kind::Prefix:
      out.push_back(t.action());
      collect_actions(t.lhs(), out);
      break;
    case ProcessTerm::Kind::Sum:
      collect_actions(t.lhs(), out);
      collect_actions(t.rhs(), out);
      break;
  }
}

class TermBuilder {
 public:
  explicit TermBuilder(Lts& l) : l_(l) {}

  StateId state_of(const ProcessTerm& t) {
    std::string key = to_string(t);
    if (auto it = states_.find(key); it != states_.end()) return it->second;
    std::vector<std::pair<Action, StateId>> moves;
    collect_moves(t, moves);
    StateId s = l_.add_state(key);
    for (auto [a, target] : moves) l_.add_transition(s, a, target);
    states_.emplace(std::move(key), s);
    return s;
  }

 private:
  void collect_moves(const ProcessTerm& t, std::vector<std::pair<Action, StateId>>& moves) {
    switch (t.kind()) {
      case ProcessTerm::Kind::Nil: break;
      case ProcessTerm::Kind::Prefix: moves.emplace_back(t.action(), state_of(t.lhs())); break;
      case ProcessTerm::Kind::Sum:
        collect_moves(t.lhs(), moves);
        collect_moves(t.rhs(), moves);
        break;
    }
  }

  Lts& l_;
  std::unordered_map<std::string, StateId> states_;
};

enum class Mark : std::uint8_t { White, Grey, Black };

bool has_cycle_from(const Lts& l, StateId s, std::vector<Mark>& marks) {
  marks[s.index] = Mark::Grey;
  for (const Edge& e : l.edges(s)) {
    Mark m = marks[e.target.index];
    if (m == Mark::Grey) return true;
    if (m == Mark::White && has_cycle_from(l, e.target, marks)) return true;
  }
  marks[s.index] = Mark::Black;
  return false;
}

int depth_rec(const Lts& l, StateId s, std::vector<int>& memo, std::vector<bool>& active) {
  if (memo[s.index] >= 0) return memo[s.index];
  if (active[s.index]) throw CycleError("cycle through state " + l.name(s));
  active[s.index] = true;
  int d = 0;
  for (const Edge& e : l.edges(s)) d = std::max(d, 1 + depth_rec(l, e.target, memo, active));
  active[s.index] = false;
  memo[s.index] = d;
  return d;
}

const std::string& canonical_rec(const Lts& l, StateId s, std::vector<std::optional<std::string>>& memo,
                                 std::vector<bool>& active) {
  if (memo[s.index]) return *memo[s.index];
  if (active[s.index]) throw CycleError("cycle through state " + l.name(s));
  active[s.index] = true;
  std::vector<std::string> summands;
  for (const Edge& e : l.edges(s)) {
    const std::string& child = canonical_rec(l, e.target, memo, active);
    bool wrap = child.find(" + ") != std::string::npos;
    summands.push_back(e.action.name() + "." + (wrap ? "(" + child + ")" : child));
  }
  std::sort(summands.begin(), summands.end());
  summands.erase(std::unique(summands.begin(), summands.end()), summands.end());
  std::string out;
  for (std::size_t i = 0; i < summands.size(); ++i) {
    if (i) out += " + ";
    out += summands[i];
  }
  if (out.empty()) out = "0";
  active[s.index] = false;
  memo[s.index] = std::move(out);
  return *memo[s.index];
}

}  // namespace

Process term_to_lts(const ProcessTerm& t) {
  std::vector<Action> acts;
  collect_actions(t, acts);
  return term_to_lts(t, Alphabet(acts));
}

Process term_to_lts(const ProcessTerm& t, const Alphabet& alphabet) {
  std::vector<Action> acts;
  collect_actions(t, acts);
  Process p{Lts(alphabet.merged(Alphabet(acts))), StateId{}};
  TermBuilder builder(p.lts);
  p.root = builder.state_of(t);
  return p;
}

Process parse_process_lts(std::string_view text, const Alphabet& alphabet) {
  return term_to_lts(parse_process(text, alphabet), alphabet);
}

std::vector<StateId> reach(const Lts& l, StateId p) {
  std::vector<bool> seen(l.num_states(), false);
  std::vector<StateId> out{p}, stack{p};
  seen[p.index] = true;
  while (!stack.empty()) {
    StateId s = stack.back();
    stack.pop_back();
    for (const Edge& e : l.edges(s)) {
      if (seen[e.target.index]) continue;
      seen[e.target.index] = true;
      out.push_back(e.target);
      stack.push_back(e.target);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

int depth(const Lts& l, StateId p) {
  std::vector<int> memo(l.num_states(), -1);
  std::vector<bool> active(l.num_states(), false);
  return depth_rec(l, p, memo, active);
}

std::size_t process_size(const Lts& l, StateId p) {
  depth(l, p);  // rejects cyclic input
  auto rs = reach(l, p);
  std::size_t n = rs.size();
  for (StateId s : rs) n += l.edges(s).size();
  return n;
}

bool validate_loop_free(const Lts& l) {
  std::vector<Mark> marks(l.num_states(), Mark::White);
  for (std::uint32_t i = 0; i < l.num_states(); ++i) {
    if (marks[i] == Mark::White && has_cycle_from(l, StateId{i}, marks)) return false;
  }
  return true;
}

Process sum(const Lts& l, StateId p, StateId q) {
  Process out{l, StateId{}};
  out.root = out.lts.add_state("sum");
  for (const Edge& e : l.edges(p)) out.lts.add_transition(out.root, e.action, e.target);
  for (const Edge& e : l.edges(q)) out.lts.add_transition(out.root, e.action, e.target);
  return out;
}

Lts disjoint_union(const Lts& l1, const Lts& l2) {
  Lts out(l1.alphabet().merged(l2.alphabet()));
  for (StateId s : l1.states()) out.add_state(l1.name(s));
  for (StateId s : l2.states()) out.add_state(l2.name(s));
  for (const auto& t : l1.transitions()) out.add_transition(t.source, t.action, t.target);
  for (const auto& t : l2.transitions()) out.add_transition(shifted(l1, t.source), t.action, shifted(l1, t.target));
  return out;
}

Process restrict_to(const Lts& l, StateId p) {
  auto rs = reach(l, p);
  std::vector<std::int64_t> index(l.num_states(), -1);
  Process out{Lts(l.alphabet()), StateId{}};
  index[p.index] = out.lts.add_state(l.name(p)).index;
  for (StateId s : rs) {
    if (index[s.index] < 0) index[s.index] = out.lts.add_state(l.name(s)).index;
  }
  for (StateId s : rs) {
    for (const Edge& e : l.edges(s)) {
      out.lts.add_transition(StateId{static_cast<std::uint32_t>(index[s.index])}, e.action,
                             StateId{static_cast<std::uint32_t>(index[e.target.index])});
    }
  }
  return out;
}

std::string canonical_term(const Lts& l, StateId p) {
  std::vector<std::optional<std::string>> memo(l.num_states());
  std::vector<bool> active(l.num_states(), false);
  return canonical_rec(l, p, memo, active);
}

std::string format_aut(const Lts& l, StateId root) {
  // Root first, remaining states in index order.
  std::vector<std::uint32_t> number(l.num_states());
  std::uint32_t next = 1;
  for (std::uint32_t i = 0; i < l.num_states(); ++i) number[i] = (i == root.index) ? 0 : next++;
  std::vector<std::uint32_t> order(l.num_states());
  for (std::uint32_t i = 0; i < l.num_states(); ++i) order[number[i]] = i;

  std::ostringstream os;
  os << "des (0, " << l.num_transitions() << ", " << l.num_states() << ")\n";
  for (std::uint32_t k = 0; k < order.size(); ++k) {
    for (const Edge& e : l.edges(StateId{order[k]})) {
      os << "(" << k << ", \"" << e.action.name() << "\", " << number[e.target.index] << ")\n";
    }
  }
  return os.str();
}

Process parse_aut(std::string_view text) {
  static const std::regex header(R"(^\s*des\s*\(\s*(\d+)\s*,\s*(\d+)\s*,\s*(\d+)\s*\)\s*$)");
  static const std::regex edge(R"re(^\s*\(\s*(\d+)\s*,\s*(?:"([^"]*)"|([^,\s"]+))\s*,\s*(\d+)\s*\)\s*$)re");

  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  std::optional<std::size_t> root, declared_transitions, declared_states;
  std::vector<std::tuple<std::size_t, std::string, std::size_t, std::size_t>> edges;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::smatch m;
    if (!root) {
      if (!std::regex_match(line, m, header)) throw FormatError(line_no, "expected 'des (<root>, <transitions>, <states>)'");
      root = std::stoul(m[1]);
      declared_transitions = std::stoul(m[2]);
      declared_states = std::stoul(m[3]);
      continue;
    }
    if (!std::regex_match(line, m, edge)) throw FormatError(line_no, "expected '(<src>, \"<label>\", <dst>)'");
    std::string label = m[2].matched ? m[2].str() : m[3].str();
    if (!Action::valid_name(label)) throw FormatError(line_no, "invalid action label '" + label + "'");
    edges.emplace_back(std::stoul(m[1]), label, std::stoul(m[4]), line_no);
  }
  if (!root) throw FormatError(line_no, "missing header");
  if (edges.size() != *declared_transitions) {
    throw FormatError(line_no, "header declares " + std::to_string(*declared_transitions) + " transitions, found " +
                                   std::to_string(edges.size()));
  }
  if (*declared_states == 0 || *root >= *declared_states) throw FormatError(1, "root outside state range");

  std::vector<Action> labels;
  for (const auto& e : edges) labels.push_back(Action::named(std::get<1>(e)));
  Process p{Lts(Alphabet(labels)), StateId{static_cast<std::uint32_t>(*root)}};
  for (std::size_t i = 0; i < *declared_states; ++i) p.lts.add_state();
  for (const auto& [src, label, dst, at] : edges) {
    if (src >= *declared_states || dst >= *declared_states) throw FormatError(at, "state index out of range");
    p.lts.add_transition(StateId{static_cast<std::uint32_t>(src)}, Action::named(label),
                         StateId{static_cast<std::uint32_t>(dst)});
  }
  if (!validate_loop_free(p.lts)) throw CycleError("LTS is not loop-free");
  return p;
}

Process read_aut(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_aut(buf.str());
}

void write_aut(const Lts& l, StateId root, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << format_aut(l, root);
}

}  // namespace nestsim
