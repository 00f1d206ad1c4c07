// Command-line front end: one subcommand per decision problem, JSON verdicts
// on standard output.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "nestsim/games.hpp"
#include "nestsim/lts.hpp"
#include "nestsim/oracle.hpp"
#include "nestsim/preorders.hpp"
#include "nestsim/semantics.hpp"
#include "nestsim/syntax.hpp"
#include "nestsim/tableau.hpp"
#include "nestsim/twosim.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace nestsim;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitParse = 2;
constexpr int kExitCap = 3;
constexpr int kExitPrecondition = 4;

struct Options {
  std::string alphabet;
  std::string out;
  std::uint64_t max_nodes = 5'000'000;
  std::size_t max_scripts = 20000;
  unsigned parallel = 1;
  bool trace = false;

  std::string formula;
  std::string logic = "HML";
  std::string rel;
  std::string mode = "within";
  std::string kind = "sim";
  std::string problem = "models";
  std::string process, other, state;
  int n = 1;
  int depth = -1, width = -1, max_edges = -1;
};

// Explicit --alphabet is authoritative; the environment default only adds
// actions to those the inputs mention.
Alphabet resolve_alphabet(const Options& o, const std::vector<Action>& mentioned) {
  if (!o.alphabet.empty()) return Alphabet::parse_list(o.alphabet);
  Alphabet a(mentioned);
  if (const char* env = std::getenv("NESTSIM_DEFAULT_ALPHABET"); env && *env) {
    a = Alphabet::parse_list(env).merged(a);
  }
  return a;
}

struct Input {
  Formula formula;
  Alphabet alphabet;
};

Input read_formula(const Options& o) {
  Formula f = parse_formula(o.formula);
  Alphabet a = resolve_alphabet(o, actions_of(f));
  if (!o.alphabet.empty()) f = parse_formula(o.formula, a);
  return {f, a};
}

Process read_process(const std::string& arg, const Alphabet& alphabet) {
  if (arg.size() > 4 && arg.ends_with(".aut")) {
    Process p = read_aut(arg);
    p.lts.extend_alphabet(alphabet);
    return p;
  }
  ProcessTerm t = alphabet.empty() ? parse_process(arg) : parse_process(arg, alphabet);
  return term_to_lts(t, alphabet);
}

StateId pick_state(const Process& p, const std::string& state) {
  if (state.empty()) return p.root;
  for (StateId s : p.lts.states()) {
    if (p.lts.name(s) == state) return s;
  }
  std::size_t idx = 0;
  try {
    idx = std::stoul(state);
  } catch (const std::exception&) {
    throw PreconditionError("unknown state " + state);
  }
  if (idx >= p.lts.num_states()) throw PreconditionError("unknown state " + state);
  return StateId{static_cast<std::uint32_t>(idx)};
}

int positive_level(const std::string& text) {
  std::size_t used = 0;
  int k = 0;
  try {
    k = std::stoi(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || k < 1) throw PreconditionError("bad level: " + text);
  return k;
}

int level_of_logic(const std::string& logic) {
  if (logic == "HML") return -1;
  if (logic == "S") return 1;
  if (logic == "2S") return 2;
  if (logic.starts_with("nS:")) return positive_level(logic.substr(3));
  throw PreconditionError("unknown logic " + logic + " (expected S, 2S, nS:<k> or HML)");
}

json process_ref(const Process& p, const Options& o, const std::string& name) {
  json j;
  j["term"] = canonical_term(p.lts, p.root);
  if (!o.out.empty()) {
    fs::create_directories(o.out);
    fs::path path = fs::path(o.out) / (name + ".aut");
    write_aut(p.lts, p.root, path);
    j["aut"] = path.string();
  }
  return j;
}

int emit(const Verdict& v, const Options& o) {
  json j;
  j["problem"] = v.problem;
  j["value"] = v.value;
  j["complete"] = v.complete;
  if (!v.note.empty()) j["note"] = v.note;
  if (v.witness) j["witness"] = process_ref(*v.witness, o, "witness");
  if (v.counterexample) {
    j["counterexample"] = json::array({process_ref(v.counterexample->first, o, "counterexample-1"),
                                       process_ref(v.counterexample->second, o, "counterexample-2")});
  }
  if (o.trace) j["trace"] = v.trace;
  j["stats"] = {{"search_nodes", v.stats.search_nodes},
                {"sat_calls", v.stats.sat_calls},
                {"runtime_ms", v.stats.runtime_ms}};
  std::cout << j.dump(2) << "\n";
  return v.complete ? kExitOk : kExitCap;
}

SearchCaps caps_of(const Options& o) { return SearchCaps{o.max_nodes}; }

TwoSimOptions twosim_options(const Options& o) {
  TwoSimOptions t;
  t.caps = caps_of(o);
  t.max_outputs = o.max_scripts;
  t.threads = o.parallel;
  return t;
}

// Games answer yes/no only; for negative verdicts a pair of models is taken
// from the bounded oracle when it agrees.
void attach_oracle_counterexample(Verdict& v, int n, Formula f, const Alphabet& alphabet) {
  if (v.value || !v.complete || v.counterexample) return;
  UniverseBounds b = default_bounds(f, alphabet);
  Verdict o = v.problem == "characteristic-modulo" ? brute_characteristic_modulo(n, f, b) : brute_prime(n, f, b);
  if (o.complete && !o.value && o.counterexample) {
    auto& [x, y] = *o.counterexample;
    auto rank = [](const Process& p) {
      return std::make_pair(process_size(p.lts, p.root), canonical_term(p.lts, p.root));
    };
    if (rank(y) < rank(x)) std::swap(x, y);
    v.counterexample = std::move(o.counterexample);
    v.note += v.note.empty() ? "" : "; ";
    v.note += "counterexample from the bounded oracle";
  }
}

int cmd_sat(const Options& o) {
  Input in = read_formula(o);
  int level = level_of_logic(o.logic);
  if (level > 0 && rewritten_fragment_level(in.formula).level > level) {
    throw PreconditionError("formula is not in the " + o.logic + " fragment");
  }
  Verdict v = sat(in.formula, in.alphabet, caps_of(o));
  return emit(v, o);
}

int cmd_mc(const Options& o) {
  Input in = read_formula(o);
  Process p = read_process(o.process, in.alphabet);
  Stopwatch clock;
  Verdict v;
  v.problem = "mc";
  v.value = models(p.lts, pick_state(p, o.state), in.formula);
  v.stats.runtime_ms = clock.elapsed_ms();
  return emit(v, o);
}

int cmd_rel(const Options& o) {
  Alphabet base = resolve_alphabet(o, {});
  Process p = read_process(o.process, base);
  Process q = read_process(o.other, base);
  Alphabet merged = p.lts.alphabet().merged(q.lts.alphabet());
  p.lts.extend_alphabet(merged);
  q.lts.extend_alphabet(merged);
  if (!validate_loop_free(p.lts) || !validate_loop_free(q.lts)) {
    throw PreconditionError("relations are computed on loop-free processes only");
  }
  Stopwatch clock;
  Verdict v;
  v.problem = "rel-" + o.rel;
  auto level = [&](std::size_t prefix) { return positive_level(o.rel.substr(prefix)); };
  if (o.rel == "sim") {
    v.value = nsim_holds(p, q, 1);
  } else if (o.rel == "bisim") {
    v.value = bisimilar(p, q);
  } else if (o.rel.starts_with("nsim:")) {
    v.value = nsim_holds(p, q, level(5));
  } else if (o.rel.starts_with("kernel:")) {
    v.value = kernel_holds(p, q, level(7));
  } else {
    throw PreconditionError("unknown relation " + o.rel + " (expected sim, nsim:<k>, bisim or kernel:<k>)");
  }
  v.stats.runtime_ms = clock.elapsed_ms();
  return emit(v, o);
}

int cmd_prime(const Options& o) {
  Input in = read_formula(o);
  if (o.n < 1) throw PreconditionError("--n must be positive");
  if (o.n == 1) throw PreconditionError("primality for n = 1 is only available through `oracle --problem prime --n 1`");
  if (o.n == 2) return emit(prime_2s(in.formula, in.alphabet, twosim_options(o)), o);
  Verdict v = decide_prime(o.n, in.formula, in.alphabet, {caps_of(o), o.trace});
  v.problem = "prime";
  attach_oracle_counterexample(v, o.n, in.formula, in.alphabet);
  return emit(v, o);
}

int cmd_characteristic(const Options& o) {
  Input in = read_formula(o);
  if (o.n < 1) throw PreconditionError("--n must be positive");
  if (o.mode != "within" && o.mode != "modulo") throw PreconditionError("--mode must be within or modulo");
  const bool within = o.mode == "within";
  if (o.n == 2) {
    return emit(characteristic_2s(in.formula, within ? CharMode::Within : CharMode::Modulo, in.alphabet,
                                  twosim_options(o)),
                o);
  }
  if (within && o.n == 1) {
    throw PreconditionError("characteristic within L_S is only available through `oracle --problem within --n 1`");
  }
  GameOptions g{caps_of(o), o.trace};
  Verdict v = within ? decide_characteristic_within(o.n, in.formula, in.alphabet, g)
                     : decide_characteristic_modulo(o.n, in.formula, in.alphabet, g);
  v.problem = within ? "characteristic-within" : "characteristic-modulo";
  attach_oracle_counterexample(v, o.n, in.formula, in.alphabet);
  return emit(v, o);
}

int cmd_game(const Options& o) {
  Input in = read_formula(o);
  GameOptions g{caps_of(o), o.trace};
  if (o.kind == "sim") {
    return emit(a_wins_sim(o.n, LabelSet{in.formula}, LabelSet{in.formula}, in.alphabet, g), o);
  }
  if (o.kind == "prime") return emit(a_wins_primensp(o.n, in.formula, in.alphabet, g), o);
  throw PreconditionError("--kind must be sim or prime");
}

int cmd_oracle(const Options& o) {
  Input in = read_formula(o);
  UniverseBounds b = default_bounds(in.formula, in.alphabet);
  if (o.depth >= 0) b.depth = o.depth;
  if (o.width >= 1) b.width = o.width;
  if (o.max_edges >= 0) b.max_edges = static_cast<std::size_t>(o.max_edges);
  if (o.problem == "models") {
    Stopwatch clock;
    auto u = universe_for(b);
    auto ms = brute_models(in.formula, b);
    Verdict v;
    v.problem = "oracle-models";
    v.value = !ms.empty();
    v.complete = !u->truncated();
    if (!ms.empty()) v.witness = ms.front();
    v.note = std::to_string(ms.size()) + " models; " + b.describe();
    v.stats.search_nodes = u->members().size();
    v.stats.runtime_ms = clock.elapsed_ms();
    return emit(v, o);
  }
  if (o.problem == "prime") return emit(brute_prime(o.n, in.formula, b), o);
  if (o.problem == "within") return emit(brute_characteristic_within(o.n, in.formula, b), o);
  if (o.problem == "modulo") return emit(brute_characteristic_modulo(o.n, in.formula, b), o);
  throw PreconditionError("--problem must be models, prime, within or modulo");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decision procedures for nested simulation logics"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* c) {
    c->add_option("--alphabet", o.alphabet, "Comma-separated actions");
    c->add_option("--out", o.out, "Directory for witness and counterexample .aut files");
    c->add_option("--max-nodes", o.max_nodes, "Search node cap (0 = unlimited)")->capture_default_str();
    c->add_option("--parallel", o.parallel, "Worker threads for the twosim procedures")->capture_default_str();
  };
  auto with_formula = [&](CLI::App* c) { c->add_option("formula", o.formula, "Formula")->required(); };

  auto* sat_cmd = app.add_subcommand("sat", "Satisfiability");
  common(sat_cmd);
  sat_cmd->add_option("--logic", o.logic, "S, 2S, nS:<k> or HML")->capture_default_str();
  with_formula(sat_cmd);

  auto* mc_cmd = app.add_subcommand("mc", "Model checking");
  common(mc_cmd);
  mc_cmd->add_option("process", o.process, ".aut file or process term")->required();
  with_formula(mc_cmd);
  mc_cmd->add_option("--state", o.state, "State name or index; the root by default");

  auto* rel_cmd = app.add_subcommand("rel", "Behavioural relations");
  common(rel_cmd);
  rel_cmd->add_option("--rel", o.rel, "sim, nsim:<k>, bisim or kernel:<k>")->required();
  rel_cmd->add_option("p", o.process, ".aut file or process term")->required();
  rel_cmd->add_option("q", o.other, ".aut file or process term")->required();

  auto* prime_cmd = app.add_subcommand("prime", "Formula primality in L_nS");
  common(prime_cmd);
  prime_cmd->add_option("--n", o.n, "Nesting level")->required();
  prime_cmd->add_option("--max-scripts", o.max_scripts, "ConPro output cap for n = 2")->capture_default_str();
  prime_cmd->add_flag("--trace", o.trace, "Include a game trace");
  with_formula(prime_cmd);

  auto* char_cmd = app.add_subcommand("characteristic", "Characteristic formulae");
  common(char_cmd);
  char_cmd->add_option("--n", o.n, "Nesting level")->required();
  char_cmd->add_option("--mode", o.mode, "within or modulo")->capture_default_str();
  char_cmd->add_option("--max-scripts", o.max_scripts, "ConPro output cap for n = 2")->capture_default_str();
  char_cmd->add_flag("--trace", o.trace, "Include a game trace");
  with_formula(char_cmd);

  auto* game_cmd = app.add_subcommand("game", "Play a game on a formula");
  common(game_cmd);
  game_cmd->add_option("--kind", o.kind, "sim or prime")->capture_default_str();
  game_cmd->add_option("--n", o.n, "Nesting level")->required();
  game_cmd->add_flag("--trace", o.trace, "Include a trace");
  with_formula(game_cmd);

  auto* oracle_cmd = app.add_subcommand("oracle", "Brute force over a bounded universe");
  common(oracle_cmd);
  oracle_cmd->add_option("--problem", o.problem, "models, prime, within or modulo")->capture_default_str();
  oracle_cmd->add_option("--n", o.n, "Nesting level")->capture_default_str();
  oracle_cmd->add_option("--depth", o.depth, "Universe depth");
  oracle_cmd->add_option("--width", o.width, "Successors per action");
  oracle_cmd->add_option("--max-edges", o.max_edges, "Edges per process");
  with_formula(oracle_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitParse;
  }

  try {
    if (*sat_cmd) return cmd_sat(o);
    if (*mc_cmd) return cmd_mc(o);
    if (*rel_cmd) return cmd_rel(o);
    if (*prime_cmd) return cmd_prime(o);
    if (*char_cmd) return cmd_characteristic(o);
    if (*game_cmd) return cmd_game(o);
    if (*oracle_cmd) return cmd_oracle(o);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const UnknownActionError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return kExitParse;
  } catch (const PreconditionError& e) {
    std::cerr << "precondition: " << e.what() << "\n";
    return kExitPrecondition;
  } catch (const CycleError& e) {
    std::cerr << "precondition: " << e.what() << "\n";
    return kExitPrecondition;
  } catch (const std::invalid_argument& e) {
    std::cerr << "precondition: " << e.what() << "\n";
    return kExitPrecondition;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  }
  return kExitOk;
}
