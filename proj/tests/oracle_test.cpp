#include <gtest/gtest.h>

#include <set>

#include "nestsim/oracle.hpp"
#include "nestsim/preorders.hpp"
#include "nestsim/semantics.hpp"
#include "nestsim/tableau.hpp"
#include "support/generators.hpp"

namespace nestsim {
namespace {

using testing::ab;

std::set<std::string> canonical_set(const std::vector<Process>& ps) {
  std::set<std::string> out;
  for (const auto& p : ps) out.insert(canonical_term(p.lts, p.root));
  return out;
}

UniverseBounds bounds(Alphabet a, int depth, int width) {
  UniverseBounds b;
  b.alphabet = std::move(a);
  b.depth = depth;
  b.width = width;
  return b;
}

TEST(Oracle, enumeration_examples) {
  EXPECT_EQ(canonical_set(enum_processes(bounds(ab(), 0, 1))), (std::set<std::string>{"0"}));
  EXPECT_EQ(canonical_set(enum_processes(bounds(Alphabet::from_names({"a"}), 1, 1))),
            (std::set<std::string>{"0", "a.0"}));
  EXPECT_EQ(canonical_set(enum_processes(bounds(ab(), 1, 1))),
            (std::set<std::string>{"0", "a.0", "b.0", "a.0 + b.0"}));
}

// All trees within bounds, without deduplication, as canonical strings.
std::set<std::string> raw_trees(const Alphabet& alphabet, int depth, int width) {
  if (depth == 0) return {"0"};
  auto smaller = raw_trees(alphabet, depth - 1, width);
  std::vector<std::string> kids(smaller.begin(), smaller.end());
  // Multisets of up to `width` children per action, repetitions allowed.
  std::vector<std::vector<std::vector<std::string>>> per_action(alphabet.size());
  for (std::size_t a = 0; a < alphabet.size(); ++a) {
    std::vector<std::string> cur;
    auto rec = [&](auto&& self, std::size_t from) -> void {
      per_action[a].push_back(cur);
      if (static_cast<int>(cur.size()) == width) return;
      for (std::size_t i = from; i < kids.size(); ++i) {
        cur.push_back(kids[i]);
        self(self, i);
        cur.pop_back();
      }
    };
    rec(rec, 0);
  }
  std::set<std::string> out;
  std::vector<std::size_t> pick(alphabet.size(), 0);
  auto combine = [&](auto&& self, std::size_t a) -> void {
    if (a == alphabet.size()) {
      std::string term;
      for (std::size_t i = 0; i < alphabet.size(); ++i) {
        for (const auto& k : per_action[i][pick[i]]) {
          if (!term.empty()) term += " + ";
          term += alphabet[i].name() + ".(" + k + ")";
        }
      }
      if (term.empty()) term = "0";
      Process p = term_to_lts(parse_process(term), alphabet);
      out.insert(canonical_term(p.lts, p.root));
      return;
    }
    for (std::size_t i = 0; i < per_action[a].size(); ++i) {
      pick[a] = i;
      self(self, a + 1);
    }
  };
  combine(combine, 0);
  return out;
}

TEST(Oracle, enumeration_is_complete_and_duplicate_free) {
  for (auto [d, w] : std::vector<std::pair<int, int>>{{1, 2}, {2, 1}, {2, 2}}) {
    auto ps = enum_processes(bounds(ab(), d, w));
    auto set = canonical_set(ps);
    EXPECT_EQ(set.size(), ps.size());
    // Bisimilarity classes are closed under merging duplicate children, so
    // the raw trees (with width counting repetitions) collapse to a subset.
    auto raw = raw_trees(ab(), d, w);
    for (const auto& r : raw) EXPECT_TRUE(set.count(r)) << r;
    for (const auto& p : ps) {
      EXPECT_LE(depth(p.lts, p.root), d);
      EXPECT_TRUE(raw.count(canonical_term(p.lts, p.root))) << canonical_term(p.lts, p.root);
    }
  }
}

TEST(Oracle, edge_cap_limits_unfolded_size) {
  UniverseBounds b = bounds(ab(), 3, 3);
  b.max_edges = 5;
  for (const auto& p : enum_processes(b)) {
    // Unfolded edge count equals the number of prefixes in the canonical term.
    std::string t = canonical_term(p.lts, p.root);
    EXPECT_LE(static_cast<std::size_t>(std::count(t.begin(), t.end(), '.')), 5u) << t;
  }
}

TEST(Oracle, brute_models_examples) {
  EXPECT_TRUE(brute_models(parse_formula("<a>ff"), bounds(ab(), 2, 2)).empty());
  EXPECT_EQ(canonical_set(brute_models(Formula::tt(), bounds(ab(), 0, 1))), (std::set<std::string>{"0"}));

  Alphabet a12 = Alphabet::from_names({"a1", "a2"});
  Formula phi = Formula::diamond(Action::named("a1"), zero_formula(a12));
  auto ms = canonical_set(brute_models(phi, bounds(a12, 2, 2)));
  EXPECT_TRUE(ms.count("a1.0"));
  EXPECT_TRUE(ms.count("a1.0 + a2.0"));
}

TEST(Oracle, characteristic_modulo_counterexample) {
  Alphabet a12 = Alphabet::from_names({"a1", "a2"});
  Formula phi = Formula::diamond(Action::named("a1"), zero_formula(a12));
  UniverseBounds b = bounds(a12, 3, 2);
  b.max_edges = 6;
  Verdict v = brute_characteristic_modulo(1, phi, b);
  EXPECT_FALSE(v.value);
  EXPECT_TRUE(is_certified(v));
  ASSERT_TRUE(v.counterexample);
  EXPECT_TRUE(models(v.counterexample->first, phi));
  EXPECT_TRUE(models(v.counterexample->second, phi));
  EXPECT_FALSE(kernel_holds(v.counterexample->first, v.counterexample->second, 1));
}

TEST(Oracle, primality_examples) {
  Verdict p = brute_prime(1, parse_formula("<a>tt"), bounds(ab(), 2, 2));
  EXPECT_TRUE(p.value);
  ASSERT_TRUE(p.witness);
  EXPECT_EQ(canonical_term(p.witness->lts, p.witness->root), "a.0");

  Verdict q = brute_prime(1, parse_formula("<a>tt | <b>tt"), bounds(ab(), 2, 2));
  EXPECT_FALSE(q.value);
  EXPECT_TRUE(is_certified(q));
  ASSERT_TRUE(q.counterexample);
  EXPECT_EQ(canonical_set({q.counterexample->first, q.counterexample->second}),
            (std::set<std::string>{"a.0", "b.0"}));

  Verdict r = brute_prime(3, parse_formula("<a>ff"), bounds(ab(), 2, 2));
  EXPECT_TRUE(r.value);
}

TEST(Oracle, n_level_examples) {
  // The only model class of this formula is a.0.
  Formula phi = parse_formula("<a>([a]ff & [b]ff) & [a]([a]ff & [b]ff) & [b]ff");
  UniverseBounds b = default_bounds(phi, ab());
  EXPECT_TRUE(brute_characteristic_within(3, phi, b).value);
  EXPECT_TRUE(brute_characteristic_modulo(3, phi, b).value);
  EXPECT_FALSE(brute_characteristic_within(3, parse_formula("<a>tt"), default_bounds(parse_formula("<a>tt"), ab())).value);
  Formula diamond = parse_formula("<a>tt");
  EXPECT_TRUE(brute_characteristic_within(1, diamond, default_bounds(diamond, ab())).value);
  EXPECT_FALSE(brute_characteristic_within(2, diamond, default_bounds(diamond, ab())).value);
}

TEST(Oracle, default_bounds_follow_the_formula) {
  Formula phi = parse_formula("<a>tt & [b]<a>tt");
  UniverseBounds b = default_bounds(phi, ab());
  EXPECT_EQ(b.depth, 3);
  // <a>tt is one subformula even though it occurs twice.
  EXPECT_EQ(b.width, 3);
  ASSERT_TRUE(b.max_edges);
}

TEST(OracleProperty, tableau_agrees_on_emptiness) {
  testing::FormulaGen gen(61, ab());
  testing::FormulaShape shape{2, 10};
  UniverseBounds b = bounds(ab(), 3, 4);
  b.max_edges = 10;
  for (int i = 0; i < 150; ++i) {
    Formula f = gen.any(shape);
    UniverseBounds bf = b;
    bf.depth = md(f) + 1;
    Tableau tab;
    EXPECT_EQ(tab.satisfiable(f), !brute_models(f, bf).empty()) << to_string(f);
  }
}

}  // namespace
}  // namespace nestsim
