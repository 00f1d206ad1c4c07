#include <gtest/gtest.h>

#include "nestsim/games.hpp"
#include "nestsim/oracle.hpp"
#include "nestsim/tableau.hpp"
#include "support/generators.hpp"

namespace nestsim {
namespace {

using testing::ab;

Alphabet a12() { return Alphabet::from_names({"a1", "a2"}); }
Formula zero12() { return zero_formula(a12()); }
Formula phi_33a() { return Formula::diamond(Action::named("a1"), zero12()); }

TEST(Moves, and_splits_conjunctions) {
  Formula x = parse_formula("<a>tt"), y = parse_formula("[b]ff");
  LabeledTree t(LabelSet{Formula::conj(x, y)});
  move_and(t, t.root);
  EXPECT_EQ(t.node(t.root).label, (LabelSet{x, y}));
  ASSERT_TRUE(t.node(t.root).final_label);
}

TEST(Moves, or_needs_one_choice_per_disjunction) {
  LabeledTree t(LabelSet{parse_formula("<a>tt | <b>tt"), parse_formula("[a]ff | tt")});
  EXPECT_EQ(pending_disjunctions(t, t.root).size(), 2u);
  EXPECT_THROW(move_or(t, t.root, {true}), PreconditionError);
  move_or(t, t.root, {false, true});
  EXPECT_FALSE(t.node(t.root).final_label.has_value() &&
               t.node(t.root).final_label->contains(parse_formula("<a>tt | <b>tt")));
  EXPECT_TRUE(t.node(t.root).label.contains(parse_formula("[a]ff")) ||
              t.node(t.root).label.contains(parse_formula("<b>tt")));
}

TEST(Moves, diamond_creates_successor_with_body) {
  LabeledTree t(LabelSet{phi_33a()});
  auto kids = move_diamond(t, t.root);
  ASSERT_EQ(kids.size(), 1u);
  EXPECT_EQ(t.node(kids[0]).label, LabelSet{zero12()});
  EXPECT_EQ(t.successors(t.root, Action::named("a1")), kids);
  EXPECT_EQ(t.node(kids[0]).id, "r.a1#0");
}

TEST(Moves, box_creates_empty_labelled_successor) {
  LabeledTree t(LabelSet{phi_33a()});
  auto s = move_box(t, t.root, Action::named("a2"));
  ASSERT_TRUE(s);
  EXPECT_TRUE(t.node(*s).label.empty());
  EXPECT_EQ(t.node(*s).id, "r.a2#box");
  EXPECT_FALSE(move_box(t, t.root, std::nullopt));
}

TEST(Moves, box_carries_box_bodies) {
  LabeledTree t(LabelSet{parse_formula("[a]<b>tt"), parse_formula("<a>[b]ff")});
  auto s = move_box(t, t.root, Action::named("a"));
  EXPECT_EQ(t.node(*s).label, LabelSet{parse_formula("<b>tt")});
  auto kids = move_diamond(t, t.root);
  EXPECT_EQ(t.node(kids[0]).label, (LabelSet{parse_formula("<b>tt"), parse_formula("[b]ff")}));
}

TEST(Moves, diamond_needs_closed_label) {
  LabeledTree t(LabelSet{parse_formula("<a>tt & <b>tt")});
  EXPECT_THROW(move_diamond(t, t.root), PreconditionError);
  EXPECT_THROW(move_and(t, 7), PreconditionError);
}

TEST(Moves, sub_only_adds_subformulae) {
  Formula phi = parse_formula("<a>tt & [b]ff");
  LabeledTree t(LabelSet{phi});
  move_sub(t, t.root, LabelSet{parse_formula("[b]ff")}, phi);
  EXPECT_TRUE(t.node(t.root).label.contains(parse_formula("[b]ff")));
  EXPECT_THROW(move_sub(t, t.root, LabelSet{parse_formula("<b>tt")}, phi), PreconditionError);
}

TEST(Moves, rem_keeps_maximal_labels) {
  Formula x = parse_formula("<a>tt"), y = parse_formula("<b>tt");
  Formula phi = parse_formula("<c>(<a>tt & <b>tt) & <c><a>tt & <c>(<b>tt & <a>tt)");
  LabeledTree t(LabelSet{phi});
  move_and(t, t.root);
  move_and(t, t.root);
  auto kids = move_diamond(t, t.root);
  ASSERT_EQ(kids.size(), 3u);
  for (auto k : kids) {
    move_and(t, k);
  }
  auto removed = move_rem(t, t.root);
  auto left = t.successors(t.root, Action::named("c"));
  ASSERT_EQ(left.size(), 1u);
  EXPECT_EQ(t.node(left[0]).label, (LabelSet{x, y}));
  EXPECT_EQ(removed.size(), 2u);
}

TEST(SimGame, example_char1se_b_wins) {
  Verdict v = a_wins_sim(1, LabelSet{phi_33a()}, LabelSet{phi_33a()}, a12(), {{}, true});
  EXPECT_FALSE(v.value);
  EXPECT_TRUE(v.complete);
  ASSERT_FALSE(v.trace.empty());
  EXPECT_NE(v.trace.back().find("player=A move=lose"), std::string::npos) << v.trace.back();
}

// With only <a1>0 and [a2]ff, a1.0 + a1.a1.0 is a model that is not
// simulation equivalent to a1.0, so B wins; forbidding deeper a1 successors
// restores A's win.
TEST(SimGame, example_char1se_needs_box_on_a1) {
  Formula psi = Formula::conj(phi_33a(), parse_formula("[a2]ff"));
  EXPECT_FALSE(a_wins_sim(1, LabelSet{psi}, LabelSet{psi}, a12()).value);
  Formula fixed = conj_all({phi_33a(), Formula::box(Action::named("a1"), zero12()), parse_formula("[a2]ff")});
  Verdict v = a_wins_sim(1, LabelSet{fixed}, LabelSet{fixed}, a12(), {{}, true});
  EXPECT_TRUE(v.value);
  EXPECT_NE(v.trace.back().find("player=B move=lose"), std::string::npos) << v.trace.back();
}

TEST(SimGame, tt_is_not_characteristic) {
  EXPECT_FALSE(a_wins_sim(1, LabelSet{Formula::tt()}, LabelSet{Formula::tt()}, ab()).value);
}

TEST(SimGame, unsatisfiable_side_is_won_by_a) {
  EXPECT_TRUE(a_wins_sim(2, LabelSet{parse_formula("<a>ff")}, LabelSet{Formula::tt()}, ab()).value);
}

TEST(SimGame, cap_gives_incomplete_verdict) {
  GameOptions o;
  o.caps.max_nodes = 3;
  Verdict v = a_wins_sim(2, LabelSet{parse_formula("<a><b>tt")}, LabelSet{parse_formula("<a><b>tt")}, ab(), o);
  EXPECT_FALSE(v.complete);
}

TEST(Characteristic, modulo_examples) {
  EXPECT_FALSE(decide_characteristic_modulo(1, phi_33a(), a12()).value);
  EXPECT_FALSE(decide_characteristic_modulo(1, Formula::ff(), ab()).value);
  EXPECT_FALSE(decide_characteristic_modulo(1, parse_formula("<a>tt & <b><a>tt"), ab()).value);
  Formula only_a = parse_formula("<a>([a]ff & [b]ff) & [a]([a]ff & [b]ff) & [b]ff");
  for (int n = 1; n <= 3; ++n) EXPECT_TRUE(decide_characteristic_modulo(n, only_a, ab()).value) << n;
}

TEST(PrimeGame, examples) {
  Formula zero = zero_formula(ab());
  Formula phi = conj_all({Formula::diamond(Action::named("a"), zero), Formula::box(Action::named("a"), zero),
                          parse_formula("[b]ff")});
  EXPECT_TRUE(a_wins_primensp(3, phi, ab()).value);
  EXPECT_FALSE(a_wins_primensp(3, parse_formula("<a>tt"), ab()).value);
  EXPECT_THROW(a_wins_primensp(3, parse_formula("<a>ff"), ab()), PreconditionError);
}

TEST(PrimeGame, decisions) {
  EXPECT_TRUE(decide_prime(3, parse_formula("<a>ff"), ab()).value);
  EXPECT_FALSE(decide_characteristic_within(3, parse_formula("<a>ff"), ab()).value);
  EXPECT_FALSE(decide_prime(3, parse_formula("<a>tt | <b>tt"), ab()).value);
  EXPECT_THROW(decide_prime(2, parse_formula("<a>tt"), ab()), PreconditionError);
}

TEST(PrimeGame, trace_ends_with_a_loss) {
  Verdict v = a_wins_primensp(3, parse_formula("<a>tt"), ab(), {{}, true});
  ASSERT_FALSE(v.trace.empty());
  for (const auto& l : v.trace) EXPECT_EQ(l.rfind("round=", 0), 0u) << l;
}

// Characteristic formulae of small processes and their weakenings give a mix
// of positive and negative instances.
std::vector<Formula> fixture_formulas(std::uint64_t seed, int count) {
  testing::ProcessGen gen(seed, ab());
  std::vector<Formula> out;
  for (int i = 0; i < count; ++i) {
    Process p = gen.process(2, 2);
    for (Formula f : testing::weakenings(testing::bisim_formula(p.lts, p.root))) out.push_back(f);
  }
  return out;
}

TEST(GameProperty, char_game_matches_oracle) {
  int positives = 0;
  for (Formula f : fixture_formulas(5, 12)) {
    for (int n = 1; n <= 3; ++n) {
      Verdict o = brute_characteristic_modulo(n, f, default_bounds(f, ab()));
      if (!o.complete) continue;
      Verdict g = decide_characteristic_modulo(n, f, ab());
      positives += g.value;
      EXPECT_EQ(g.value, o.value) << "n=" << n << " " << to_string(f);
    }
  }
  EXPECT_GT(positives, 0);
}

TEST(GameProperty, prime_game_matches_oracle) {
  int checked = 0;
  for (Formula f : fixture_formulas(6, 12)) {
    if (rewritten_fragment_level(f).level > 3) continue;
    Verdict o = brute_characteristic_within(3, f, default_bounds(f, ab()));
    if (!o.complete) continue;
    ++checked;
    EXPECT_EQ(decide_characteristic_within(3, f, ab()).value, o.value) << to_string(f);
  }
  EXPECT_GT(checked, 10);
}

TEST(GameProperty, winning_is_monotone_in_the_level) {
  for (Formula f : fixture_formulas(7, 12)) {
    bool higher = decide_characteristic_modulo(3, f, ab()).value;
    for (int m = 2; m >= 1; --m) {
      bool lower = decide_characteristic_modulo(m, f, ab()).value;
      if (higher) EXPECT_TRUE(lower) << m << " " << to_string(f);
      higher = lower;
    }
  }
}

TEST(GameProperty, random_formulae_match_oracle) {
  testing::FormulaGen gen(8, ab());
  for (int i = 0; i < 80; ++i) {
    Formula f = gen.any({2, 9});
    Verdict o = brute_characteristic_modulo(2, f, default_bounds(f, ab()));
    if (!o.complete) continue;
    EXPECT_EQ(decide_characteristic_modulo(2, f, ab()).value, o.value) << to_string(f);
  }
}

TEST(GameProperty, labels_stay_in_formula_closure) {
  // The solver checks every closed label against the closure and throws
  // std::logic_error otherwise; run it over a spread of inputs.
  for (Formula f : fixture_formulas(9, 6)) {
    GameSolver g(ab());
    EXPECT_NO_THROW(g.sim(2, LabelSet{f}, LabelSet{f}));
    if (rewritten_fragment_level(f).level <= 3 && g.tableau().satisfiable(f)) EXPECT_NO_THROW(g.primensp(3, f));
  }
  LabelSet closure = game_formula_closure({parse_formula("[a](<b>tt | !<a>tt)")});
  EXPECT_TRUE(closure.contains(parse_formula("<b>tt | !<a>tt")));
  EXPECT_TRUE(closure.contains(parse_formula("<b>tt")));
  EXPECT_TRUE(closure.contains(parse_formula("!<a>tt")));
}

}  // namespace
}  // namespace nestsim
