#include <gtest/gtest.h>

#include <set>

#include "nestsim/oracle.hpp"
#include "nestsim/preorders.hpp"
#include "nestsim/semantics.hpp"
#include "nestsim/twosim.hpp"
#include "support/generators.hpp"

namespace nestsim {
namespace {

using testing::ab;

std::string term_of(const Process& p) { return canonical_term(p.lts, p.root); }
Process proc(const std::string& t) { return term_to_lts(parse_process(t), ab()); }

ChoiceScript skips(std::size_t n) { return {{}, std::vector<std::optional<BoxPhase>>(n)}; }

TEST(ConPro, unsatisfiable_diamond_stops) {
  ConProRun r = conpro_run(parse_formula("<a>ff"), skips(1), ab());
  EXPECT_TRUE(r.stopped);
  EXPECT_NE(r.stop_reason.find("diamond successor"), std::string::npos) << r.stop_reason;
}

TEST(ConPro, diamond_without_box_block) {
  ConProRun r = conpro_run(parse_formula("<a>tt"), skips(2), ab());
  ASSERT_FALSE(r.stopped);
  EXPECT_EQ(term_of(r.process()), "a.0");
  EXPECT_EQ(r.lts.name(r.root), "s0");
  EXPECT_EQ(r.depth, (std::vector<int>{0, 1}));
}

TEST(ConPro, box_block_adds_children) {
  ChoiceScript s = skips(3);
  s.box_phases[0] = BoxPhase{1, {Action::named("b")}};
  ConProRun r = conpro_run(parse_formula("<a>tt"), s, ab());
  ASSERT_FALSE(r.stopped);
  EXPECT_EQ(term_of(r.process()), "a.0 + b.0");
  EXPECT_EQ(r.box_count, 1);
  // The b-child is created after the a-child and has an empty label.
  EXPECT_TRUE(r.label[2].empty());
}

TEST(ConPro, disjunct_picks_choose_the_branch) {
  Formula f = parse_formula("<a>tt | <b>tt");
  ChoiceScript s = skips(2);
  s.disjunct_picks = {Pick::Right};
  EXPECT_EQ(term_of(conpro_run(f, s, ab()).process()), "b.0");
  s.disjunct_picks = {Pick::Left};
  EXPECT_EQ(term_of(conpro_run(f, s, ab()).process()), "a.0");
}

TEST(ConPro, box_into_ff_stops) {
  ChoiceScript s = skips(1);
  s.box_phases[0] = BoxPhase{1, {Action::named("b")}};
  ConProRun r = conpro_run(parse_formula("[b]ff"), s, ab());
  EXPECT_TRUE(r.stopped);
}

TEST(ConPro, malformed_scripts) {
  Formula f = parse_formula("<a>tt | <b>tt");
  EXPECT_THROW(conpro_run(f, skips(2), ab()), ScriptError);
  ChoiceScript extra = skips(3);
  extra.disjunct_picks = {Pick::Left};
  EXPECT_THROW(conpro_run(f, extra, ab()), ScriptError);
  ChoiceScript big = skips(2);
  big.box_phases[0] = BoxPhase{3, {Action::named("a"), Action::named("a"), Action::named("a")}};
  EXPECT_THROW(conpro_run(parse_formula("<a>tt"), big, ab()), ScriptError);
  ChoiceScript mismatch = skips(2);
  mismatch.box_phases[0] = BoxPhase{2, {Action::named("a")}};
  EXPECT_THROW(conpro_run(parse_formula("<a>tt"), mismatch, ab()), ScriptError);
  EXPECT_THROW(conpro_run(parse_formula("[a]<b>tt"), skips(1), ab()), PreconditionError);
}

std::set<std::string> output_terms(const ConProEnumeration& e) {
  std::set<std::string> out;
  for (const auto& o : e.outputs) out.insert(term_of(o.process));
  return out;
}

TEST(ConProEnumerate, examples) {
  EXPECT_EQ(output_terms(conpro_enumerate(Formula::tt(), ab())), (std::set<std::string>{"0", "a.0", "b.0"}));
  EXPECT_TRUE(conpro_enumerate(parse_formula("<a>ff"), ab()).outputs.empty());
  auto both = output_terms(conpro_enumerate(parse_formula("<a>tt | <b>tt"), ab()));
  EXPECT_TRUE(both.count("a.0"));
  EXPECT_TRUE(both.count("b.0"));
}

TEST(ConProEnumerate, output_cap_gives_incomplete_stream) {
  TwoSimOptions o;
  o.max_outputs = 5;
  EXPECT_FALSE(conpro_enumerate(parse_formula("<a>tt | <b>tt"), ab(), o).complete);
}

TEST(Mlb, examples) {
  Process a0 = proc("a.0"), b0 = proc("b.0");
  Lts ab0 = disjoint_union(a0.lts, b0.lts);
  EXPECT_FALSE(mlb_2s(ab0, a0.root, shifted(a0.lts, b0.root)).has_value());
  Process x = proc("a.b.0"), y = proc("a.b.0 + a.0");
  Lts u = disjoint_union(x.lts, y.lts);
  auto g = mlb_2s(u, x.root, shifted(x.lts, y.root));
  ASSERT_TRUE(g);
  EXPECT_TRUE(kernel_holds(*g, x, 2));
  Process p = proc("a.(a.0 + b.0) + b.0");
  auto same = mlb_2s(p.lts, p.root, p.root);
  ASSERT_TRUE(same);
  EXPECT_TRUE(kernel_holds(*same, p, 2));
}

TEST(Prime2S, examples) {
  EXPECT_TRUE(prime_2s(parse_formula("<a>ff"), ab()).value);
  Verdict v = prime_2s(parse_formula("<a>tt | <b>tt"), ab());
  EXPECT_FALSE(v.value);
  ASSERT_TRUE(v.counterexample);
  EXPECT_EQ((std::set<std::string>{term_of(v.counterexample->first), term_of(v.counterexample->second)}),
            (std::set<std::string>{"a.0", "b.0"}));
  EXPECT_FALSE(prime_2s(parse_formula("<a>tt"), ab()).value);
  EXPECT_THROW(prime_2s(parse_formula("[a]<b>tt"), ab()), PreconditionError);
}

TEST(Characteristic2S, examples) {
  EXPECT_FALSE(characteristic_2s(parse_formula("<a>ff"), CharMode::Within, ab()).value);
  Formula zero = zero_formula(ab());
  Formula only_a = conj_all({Formula::diamond(Action::named("a"), zero), Formula::box(Action::named("a"), zero),
                             parse_formula("[b]ff")});
  Verdict w = characteristic_2s(only_a, CharMode::Within, ab());
  EXPECT_TRUE(w.value);
  ASSERT_TRUE(w.witness);
  EXPECT_EQ(term_of(*w.witness), "a.0");
  Verdict m = characteristic_2s(parse_formula("<a>tt"), CharMode::Modulo, ab());
  EXPECT_FALSE(m.value);
  ASSERT_TRUE(m.counterexample);
  EXPECT_EQ(term_of(m.counterexample->first), "a.0");
  EXPECT_EQ(term_of(m.counterexample->second), "a.0 + b.0");
}

// Random formulae of L_2S, plus characteristic formulae within L_2S of small
// processes and their weakenings.
std::vector<Formula> twosim_fixtures(std::uint64_t seed, int random, int processes) {
  std::vector<Formula> out;
  testing::FormulaGen fg(seed, ab());
  while (static_cast<int>(out.size()) < random) {
    Formula f = fg.any({2, 8});
    if (rewritten_fragment_level(f).level <= 2) out.push_back(f);
  }
  testing::ProcessGen pg(seed, ab());
  for (int i = 0; i < processes; ++i) {
    Process p = pg.process(2, 2);
    for (Formula f : testing::weakenings(testing::sim2_formula(p.lts, p.root))) out.push_back(f);
  }
  return out;
}

TEST(TwoSimProperty, sim2_formula_is_characteristic_within) {
  testing::ProcessGen pg(3, ab());
  for (int i = 0; i < 20; ++i) {
    Process p = pg.process(2, 2);
    Formula f = testing::sim2_formula(p.lts, p.root);
    for (const Process& q : enum_processes(default_bounds(Formula::tt(), ab()))) {
      EXPECT_EQ(models(q, f), nsim_holds(p, q, 2));
    }
  }
}

TEST(TwoSimProperty, outputs_satisfy_and_replay) {
  TwoSimOptions o;
  o.max_outputs = 3000;
  o.max_partials = 50000;
  int complete = 0, total = 0;
  for (Formula f : twosim_fixtures(11, 60, 8)) {
    ConProEnumeration e = conpro_enumerate(f, ab(), o);
    ++total;
    if (!e.complete) continue;
    ++complete;
    std::set<std::string> seen;
    for (const auto& o : e.outputs) {
      EXPECT_TRUE(models(o.process, f)) << to_string(f) << " / " << term_of(o.process);
      EXPECT_LE(depth(o.process.lts, o.process.root), md(f) + 1);
      EXPECT_LE(o.box_count, static_cast<int>(size(f)));
      EXPECT_TRUE(seen.insert(term_of(o.process)).second);
      ConProRun r = conpro_run(f, o.script, ab());
      ASSERT_FALSE(r.stopped) << to_string(f);
      EXPECT_EQ(term_of(r.process()), term_of(o.process)) << to_string(f);
      EXPECT_LE(r.box_count, static_cast<int>(size(f)));
    }
  }
  EXPECT_GT(complete, total / 2);
}

TEST(TwoSimProperty, budget_stages_are_nested) {
  for (Formula f : twosim_fixtures(17, 20, 2)) {
    std::set<std::string> prev;
    for (int b = 0; b <= 2; ++b) {
      TwoSimOptions o;
      o.box_budget = b;
      o.max_outputs = 3000;
      o.max_partials = 50000;
      ConProEnumeration e = conpro_enumerate(f, ab(), o);
      if (!e.complete) break;
      auto cur = output_terms(e);
      for (const auto& t : prev) EXPECT_TRUE(cur.count(t)) << to_string(f) << " " << t;
      for (const auto& out : e.outputs) EXPECT_LE(out.box_count, b);
      prev = std::move(cur);
    }
  }
}

TEST(TwoSimProperty, outputs_exist_iff_satisfiable) {
  int unsat = 0;
  for (Formula f : twosim_fixtures(12, 120, 0)) {
    Tableau tab;
    bool s = tab.satisfiable(f);
    unsat += !s;
    TwoSimOptions o;
    o.box_budget = 0;
    EXPECT_EQ(!conpro_enumerate(f, ab(), o).outputs.empty(), s) << to_string(f);
  }
  EXPECT_GT(unsat, 0);
}

TEST(TwoSimProperty, mlb_is_the_greatest_common_lower_bound) {
  UniverseBounds b;
  b.alphabet = ab();
  b.depth = 2;
  b.width = 2;
  auto u = universe_for(b);
  const Lts& l = u->lts();
  LazyNsim rel(l);
  const auto& ms = u->members();
  int pairs = 0, below = 0;
  for (std::size_t i = 0; i < ms.size() && pairs < 40; i += 3) {
    for (std::size_t j = i + 1; j < ms.size() && pairs < 40; ++j) {
      auto g = mlb_2s(l, ms[i], ms[j]);
      ASSERT_EQ(g.has_value(), rel.equiv(1, ms[i], ms[j]));
      if (!g || rel.equiv(2, ms[i], ms[j])) continue;
      ++pairs;
      for (StateId r : ms) {
        if (!rel.le(2, r, ms[i]) || !rel.le(2, r, ms[j])) continue;
        ++below;
        EXPECT_TRUE(nsim_holds(restrict_to(l, r), *g, 2)) << canonical_term(l, r);
      }
    }
  }
  EXPECT_EQ(pairs, 40);
  EXPECT_GT(below, pairs);
}

TEST(TwoSimProperty, verdicts_match_oracle) {
  int positives = 0, checked = 0;
  for (Formula f : twosim_fixtures(14, 60, 10)) {
    UniverseBounds b = default_bounds(f, ab());
    Verdict op = brute_prime(2, f, b);
    Verdict ow = brute_characteristic_within(2, f, b);
    Verdict om = brute_characteristic_modulo(2, f, b);
    if (!op.complete || !ow.complete || !om.complete) continue;
    ++checked;
    Verdict p = prime_2s(f, ab());
    ASSERT_TRUE(p.complete);
    EXPECT_EQ(p.value, op.value) << to_string(f);
    EXPECT_EQ(characteristic_2s(f, CharMode::Within, ab()).value, ow.value) << to_string(f);
    EXPECT_EQ(characteristic_2s(f, CharMode::Modulo, ab()).value, om.value) << to_string(f);
    positives += ow.value;
  }
  EXPECT_GT(checked, 40);
  EXPECT_GT(positives, 5);
}

TEST(TwoSimProperty, within_witness_is_least_model) {
  testing::ProcessGen pg(15, ab());
  for (int i = 0; i < 10; ++i) {
    Process p = pg.process(2, 2);
    Verdict w = characteristic_2s(testing::sim2_formula(p.lts, p.root), CharMode::Within, ab());
    ASSERT_TRUE(w.value);
    ASSERT_TRUE(w.witness);
    EXPECT_TRUE(kernel_holds(*w.witness, p, 2)) << term_of(p);
  }
}

TEST(TwoSimProperty, parallel_agrees_with_sequential) {
  TwoSimOptions par;
  par.threads = 4;
  for (Formula f : twosim_fixtures(16, 30, 4)) {
    Verdict s = prime_2s(f, ab());
    Verdict p = prime_2s(f, ab(), par);
    EXPECT_EQ(s.value, p.value) << to_string(f);
    EXPECT_EQ(s.counterexample.has_value(), p.counterexample.has_value());
    if (s.counterexample && p.counterexample) {
      EXPECT_EQ(term_of(s.counterexample->first), term_of(p.counterexample->first));
      EXPECT_EQ(term_of(s.counterexample->second), term_of(p.counterexample->second));
    }
  }
}

}  // namespace
}  // namespace nestsim
