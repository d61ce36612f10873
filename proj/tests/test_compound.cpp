#include <gtest/gtest.h>

#include "helpers.hpp"

using namespace okt;

namespace {

// Frozen from tests/oracles/compound_counts.py: {tests, outcomes} at depths 0..3.
struct CountRow {
  const char* name;
  std::vector<std::vector<std::string>> base;
  std::vector<std::pair<double, std::size_t>> counts;
};

const std::vector<CountRow>& count_table() {
  static const std::vector<CountRow> t{
      {"{a,b}", {{"a", "b"}}, {{1, 1}, {2, 3}, {5, 7}, {26, 15}}},
      {"{a}", {{"a"}}, {{1, 1}, {2, 2}, {3, 3}, {4, 4}}},
      {"{a,b,c}", {{"a", "b", "c"}}, {{1, 1}, {2, 4}, {9, 13}, {730, 40}}},
      {"wright", {{"x", "y", "z"}, {"q", "z"}}, {{1, 1}, {3, 5}, {37, 21}, {52023, 85}}},
      {"{a,b},{c,d}", {{"a", "b"}, {"c", "d"}}, {{1, 1}, {3, 5}, {19, 21}, {723, 85}}},
  };
  return t;
}

TEST(Compound, TestCountsMatchRecursionOracle) {
  for (const auto& row : count_table()) {
    auto base = build_test_space(row.base);
    auto counts = detail::compound_test_counts(base, 3);
    for (std::size_t n = 0; n <= 3; ++n) {
      EXPECT_EQ(counts[n], row.counts[n].first) << row.name << " depth " << n;
      if (row.counts[n].first > 1000) continue;
      auto c = compound_space(base, n);
      EXPECT_EQ(c.ts.test_count(), row.counts[n].first) << row.name << " depth " << n;
      EXPECT_EQ(c.ts.size(), row.counts[n].second) << row.name << " depth " << n;
    }
  }
}

TEST(Compound, DepthZeroIsEpsilon) {
  auto c = compound_space(wright(), 0);
  EXPECT_EQ(c.ts.size(), 1u);
  EXPECT_EQ(c.ts.label(c.epsilon()), "ε");
  EXPECT_TRUE(c.ts.is_test({c.epsilon()}));
}

TEST(Compound, WordLabels) {
  auto w = wright();
  EXPECT_EQ(word_label(w, {w.id("x"), w.id("q")}), "xq");
  auto long_labels = build_test_space({{"up", "down"}});
  EXPECT_EQ(word_label(long_labels, {0, 1}), "up.down");
  EXPECT_EQ(word_label(long_labels, {}), "ε");
}

TEST(Compound, MembershipMatchesMaterializedTests) {
  for (const auto& base : {single({"a", "b"}), build_test_space({{"a", "b"}, {"b", "c"}})}) {
    auto c = compound_space(base, 2);
    std::set<OutcomeSet> tests(c.ts.tests().begin(), c.ts.tests().end());
    auto ev = brute_events(c.ts);
    std::set<Event> evset(ev.begin(), ev.end());
    ASSERT_LE(c.ts.size(), 16u);
    for (std::uint32_t m = 0; m < (1U << c.ts.size()); ++m) {
      OutcomeSet s;
      std::vector<Word> words;
      for (Oid i = 0; i < c.ts.size(); ++i)
        if (m >> i & 1) {
          s.push_back(i);
          words.push_back(c.words[i]);
        }
      EXPECT_EQ(compound_is_test(base, words, 2), tests.count(s) > 0);
      EXPECT_EQ(compound_is_event(base, words, 2), evset.count(s) > 0);
    }
  }
}

TEST(Compound, DepthOneAdjoinsAUnitTest) {
  for (const auto& ts : corpus_upto(4)) EXPECT_TRUE(lemma_c0_unit(ts));
}

TEST(Compound, NextDepthIsAForwardProduct) {
  for (const auto& ts : corpus_upto(3))
    for (std::size_t n = 0; n <= 1; ++n) EXPECT_TRUE(lemma_c0_step(ts, n)) << ts.format(ts.all().members());
  EXPECT_TRUE(lemma_c0_step(wright(), 1));
}

TEST(Compound, ShallowCompoundsAreSubmodels) {
  for (const auto& base : {single({"a", "b"}), wright()}) {
    auto c1 = compound_space(base, 1);
    auto c2 = compound_space(base, 2);
    EXPECT_TRUE(is_submodel(c1, c2));
  }
}

TEST(Compound, FreeMonoidLaws) {
  for (const auto& r : check_compound_monad_laws(2, 3)) {
    EXPECT_TRUE(r.holds) << r.law;
    EXPECT_GT(r.points, 0u);
  }
}

TEST(Compound, NonAtomicity) {
  auto c = compound_space(single({"a", "b"}), 2);
  auto ws = prop4_nonatomicity(c);
  // ε, a, b.
  ASSERT_EQ(ws.size(), 3u);
  for (const auto& w : ws) {
    EXPECT_GE(w.extended.size(), 2u);
    EXPECT_TRUE(brute_perspective(c.ts, {w.outcome}, w.extended));
    EXPECT_TRUE(brute_test(c.ts, set_union({w.outcome}, w.axis)));
    EXPECT_TRUE(brute_test(c.ts, set_union(w.extended, w.axis)));
    EXPECT_FALSE(is_atomic_outcome(c.ts, w.outcome));
  }
  try {
    prop4_nonatomicity(compound_space(single({"a"}), 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::HypothesisUnmet);
  }
}

TEST(Compound, ForwardProductTests) {
  auto a = wright();
  auto b = build_test_space({{"u", "v"}, {"w"}});
  auto fp = forward_product_space(a, b);
  // Σ_E |ℳ(B)|^|E|.
  EXPECT_EQ(fp.ts.test_count(), 8u + 4u);
  EXPECT_EQ(fp.ts.size(), 12u);
  EXPECT_TRUE(fp_orthogonality_matches(fp));
}

TEST(Compound, ForwardPerspectivityMatchesBruteForce) {
  auto spaces = corpus_upto(3);
  for (const auto& a : spaces)
    for (const auto& b : spaces) {
      auto fp = forward_product_space(a, b);
      if (fp.ts.size() > 6) continue;
      EXPECT_TRUE(fp_orthogonality_matches(fp));
      auto ev = brute_events(fp.ts);
      for (const auto& x : ev)
        for (const auto& y : ev) ASSERT_EQ(fp_perspective_criterion(fp, x, y), brute_perspective(fp.ts, x, y));
    }
}

TEST(Compound, MarginalsAndConditionals) {
  auto a = Model::full(single({"a", "b"}));
  auto b = Model::full(single({"u", "v"}));
  auto fp = forward_product(a, b);
  Weight alpha{Rational(1, 4), Rational(3, 4)};
  Weight beta{Rational(2, 3), Rational(1, 3)};
  auto w = product_state(fp.space, alpha, beta);
  EXPECT_TRUE(contains_state(fp.model, w));
  EXPECT_EQ(marginal(fp.space, w), alpha);
  EXPECT_EQ(conditional(fp.space, w, 1), beta);
  Weight delta{Rational(1), Rational(0)};
  auto z = product_state(fp.space, delta, beta);
  try {
    conditional(fp.space, z, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroMarginal);
  }
}

TEST(Compound, RetrodictiveMarginalDependsOnTheTest) {
  auto fp = forward_product_space(build_test_space({{"a", "b"}, {"c", "d"}}), single({"u", "v"}));
  Weight half(4, Rational(1, 2));
  Weight up{Rational(1), Rational(0)}, down{Rational(0), Rational(1)};
  auto w = pair_state(fp, half, {up, up, down, down});
  EXPECT_EQ(retrodictive_marginal(fp, w, 0), up);
  EXPECT_EQ(retrodictive_marginal(fp, w, 1), down);
}

TEST(Compound, GeneratedForwardProduct) {
  auto ts = single({"a", "b"});
  Model fair(ts, StateSpace::of({Weight{Rational(1, 2), Rational(1, 2)}}));
  auto full = Model::full(ts);
  auto fp = forward_product(fair, full);
  // One α, two vertices for each of β_a and β_b.
  EXPECT_EQ(fp.model.omega().generators.size(), 4u);
  for (const auto& g : fp.model.omega().generators) EXPECT_TRUE(is_probability_weight(fp.model.ts(), g));
}

TEST(Compound, PairMorphismsOutsideTheCore) {
  auto b = Model::full(single({"u"}));
  auto b2 = Model::full(single({"u", "v"}));
  auto psi = validate_morphism(b, b2, {0});
  ASSERT_FALSE(psi.test_preserving);

  auto one = Model::full(single({"a", "b"}));
  auto phi1 = identity_morphism(one);
  auto s1 = forward_product(one, b), d1 = forward_product(one, b2);
  // Every outcome lies in the core of a single test.
  EXPECT_NO_THROW(fp_pair_morphism(phi1, {psi, psi}, s1, d1));

  auto two = Model::full(build_test_space({{"a", "b"}, {"c", "d"}}));
  auto phi2 = identity_morphism(two);
  auto s2 = forward_product(two, b), d2 = forward_product(two, b2);
  try {
    fp_pair_morphism(phi2, {psi, psi, psi, psi}, s2, d2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotAMorphism);
  }
  auto id = identity_morphism(b);
  auto s3 = forward_product(two, b);
  auto ok = fp_pair_morphism(phi2, {id, id, id, id}, s2, s3);
  EXPECT_TRUE(ok.test_preserving);
}

TEST(Compound, TransitionWeightsAreStates) {
  auto base = Model::full(single({"a", "b"}));
  auto tc = truncated_compound(base, 2);
  TransitionFunction f;
  f.fallback = {Rational(1, 2), Rational(1, 2)};
  f.rows[Word{0}] = {Rational(1), Rational(0)};
  ASSERT_TRUE(validate_transition(base, f));
  auto w = compound_weight(tc.space, f);
  EXPECT_TRUE(contains_state(tc.model, w));
  EXPECT_EQ(w[tc.space.id_of({0, 0})], Rational(1, 2));
  EXPECT_EQ(w[tc.space.id_of({0, 1})], Rational(0));
  f.rows[Word{1}] = {Rational(2), Rational(-1)};
  EXPECT_FALSE(validate_transition(base, f));
}

TEST(Compound, GeneratedCompound) {
  auto ts = single({"a", "b"});
  Model m(ts, StateSpace::of({Weight{Rational(1), Rational(0)}, Weight{Rational(0), Rational(1)}}));
  auto tc = truncated_compound(m, 2);
  for (const auto& g : tc.model.omega().generators) EXPECT_TRUE(is_probability_weight(tc.model.ts(), g));
  // Two choices at ε; only the row at the charged letter then matters.
  EXPECT_EQ(tc.model.omega().generators.size(), 4u);
}

TEST(Compound, ConcatenationIsSequential) {
  for (const auto& base : {single({"a", "b"}), wright()}) {
    auto tc = truncated_compound(Model::full(base), 2);
    auto pi = concatenation_product(tc.space);
    auto rep = check_sequential(tc.model, pi);
    for (const auto& l : rep.laws) EXPECT_TRUE(l.holds) << l.law << " " << l.witness;
  }
}

TEST(Compound, KolmogorovIntersectionIsSequential) {
  for (std::size_t n = 1; n <= 3; ++n) {
    auto k = kolmogorov_model(n);
    auto rep = validate_sequential(k.model, k.pi);
    EXPECT_FALSE(rep.partially_verified);
    for (const auto& w : enumerate_vertices(k.model.ts()).vertices) EXPECT_TRUE(corollary2_check(k.model, k.pi, w));
  }
}

TEST(Compound, BrokenProductsAreRejected) {
  auto k = kolmogorov_model(2);
  auto pi = k.pi;
  pi.unit = 0;
  try {
    validate_sequential(k.model, pi);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotSequential);
  }
  auto rep = check_sequential(k.model, pi);
  EXPECT_FALSE(rep.ok());
  SequentialProduct wrong = k.pi;
  wrong.table.pop_back();
  EXPECT_THROW(check_sequential(k.model, wrong), Error);
}

TEST(Compound, TestPreservingMapsExtendToStrings) {
  auto m = Model::full(wright());
  const auto& ts = m.ts();
  std::vector<Oid> swap(ts.size());
  for (Oid x = 0; x < ts.size(); ++x) swap[x] = x;
  std::swap(swap[ts.id("x")], swap[ts.id("y")]);
  auto phi = validate_morphism(m, m, swap);
  EXPECT_TRUE(lemma_c5_check(phi, 2));
  auto a = Model::full(single({"a"}));
  auto b = Model::full(single({"a", "b"}));
  auto sub = validate_morphism(a, b, {0});
  try {
    lemma_c5_check(sub, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::HypothesisUnmet);
  }
}

TEST(Compound, PreservationOnSmallModels) {
  for (const auto& m : corpus_models(corpus_upto(3))) {
    EXPECT_TRUE(preservation_forward(m, m).ok()) << m.ts().format(m.ts().all().members());
    EXPECT_TRUE(preservation_compound(m, 2).ok()) << m.ts().format(m.ts().all().members());
  }
}

}  // namespace
