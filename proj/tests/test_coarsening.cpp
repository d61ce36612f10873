#include <gtest/gtest.h>

#include "helpers.hpp"

using namespace okt;

namespace {

// Sets of pairwise disjoint nonempty events whose union is a test.
std::set<std::set<Event>> brute_sharp_tests(const TestSpace& ts) {
  std::vector<Event> ev;
  for (auto& e : brute_events(ts))
    if (!e.empty()) ev.push_back(e);
  std::set<std::set<Event>> out;
  for (std::uint32_t m = 1; m < (1U << ev.size()); ++m) {
    Event u;
    std::size_t total = 0;
    std::set<Event> fam;
    for (std::size_t i = 0; i < ev.size(); ++i)
      if (m >> i & 1) {
        u = set_union(u, ev[i]);
        total += ev[i].size();
        fam.insert(ev[i]);
      }
    if (u.size() == total && brute_test(ts, u)) out.insert(fam);
  }
  return out;
}

TEST(Coarsening, SetPartitionCounts) {
  // Bell numbers.
  const std::size_t bell[] = {1, 2, 5, 15, 52};
  for (std::size_t n = 1; n <= 5; ++n) {
    OutcomeSet s;
    for (Oid i = 0; i < n; ++i) s.push_back(i);
    auto ps = set_partitions(s);
    EXPECT_EQ(ps.size(), bell[n - 1]);
    std::set<std::set<OutcomeSet>> distinct;
    for (const auto& p : ps) {
      OutcomeSet u;
      for (const auto& b : p) {
        EXPECT_FALSE(b.empty());
        EXPECT_TRUE(disjoint(u, b));
        u = set_union(u, b);
      }
      EXPECT_EQ(u, s);
      distinct.emplace(p.begin(), p.end());
    }
    EXPECT_EQ(distinct.size(), ps.size());
  }
  EXPECT_TRUE(set_partitions({}).empty());
}

TEST(Coarsening, SingleTestOfThree) {
  auto s = sharp_space(single({"a", "b", "c"}));
  EXPECT_EQ(s.ts.size(), 7u);
  EXPECT_EQ(s.ts.test_count(), 5u);
}

TEST(Coarsening, SharpTestsAreTestPartitions) {
  for (const auto& ts : corpus_upto(4)) {
    auto s = sharp_space(ts);
    EXPECT_EQ(s.ts.size() + 1, brute_events(ts).size());
    std::set<std::set<Event>> lib;
    for (const auto& t : s.ts.tests()) {
      std::set<Event> fam;
      for (Oid a : t) fam.insert(s.underlying[a]);
      lib.insert(fam);
    }
    EXPECT_EQ(lib, brute_sharp_tests(ts));
    for (Oid a = 0; a < s.underlying.size(); ++a) EXPECT_EQ(s.id_of(s.underlying[a]), a);
  }
}

TEST(Coarsening, IdOfRejectsNonEvents) {
  auto w = wright();
  auto s = sharp_space(w);
  EXPECT_FALSE(s.find({}));
  EXPECT_FALSE(s.find(ids(w, {"x", "q"})));
  try {
    s.id_of(ids(w, {"x", "q"}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotAnEvent);
  }
}

TEST(Coarsening, LiftedStatesAreStates) {
  for (const auto& ts : corpus_upto(4)) {
    auto s = sharp_space(ts);
    for (const auto& w : enumerate_vertices(ts).vertices) EXPECT_TRUE(is_probability_weight(s.ts, lift_weight(s, w)));
  }
}

TEST(Coarsening, GeneratedStatesAreLifted) {
  auto ts = single({"a", "b"});
  Model m(ts, StateSpace::of({Weight{Rational(1, 3), Rational(2, 3)}}));
  auto c = coarsen(m);
  ASSERT_FALSE(c.model.omega().is_full());
  const auto& g = c.model.omega().generators.front();
  EXPECT_EQ(g[c.space.id_of({0})], Rational(1, 3));
  EXPECT_EQ(g[c.space.id_of({0, 1})], Rational(1));
}

TEST(Coarsening, MonadLawsOnCorpus) {
  for (const auto& ts : corpus_upto(4))
    for (const auto& r : check_monad_laws_sharp(ts)) {
      EXPECT_TRUE(r.holds) << r.law << " " << r.witness;
      EXPECT_GT(r.points, 0u);
    }
}

TEST(Coarsening, UnitAndMultiplicationAreMorphisms) {
  auto m = Model::full(wright());
  auto c1 = coarsen(m);
  auto c2 = coarsen(c1.model);
  auto eta = unit_eta(m, c1);
  EXPECT_TRUE(eta.test_preserving);
  EXPECT_TRUE(eta.embedding);
  auto mu = mult_mu(c1, c2);
  EXPECT_TRUE(mu.test_preserving);
  EXPECT_THROW(unit_eta(c1.model, c1), Error);
}

TEST(Coarsening, FunctorOnMorphisms) {
  auto a = Model::full(single({"a", "b"}));
  auto b = Model::full(build_test_space({{"a", "b"}, {"c", "d"}}));
  auto phi = validate_morphism(a, b, {2, 3});
  auto ca = coarsen(a);
  auto cb = coarsen(b);
  auto ps = functor_sharp(phi, ca, cb);
  for (Oid x = 0; x < ca.space.underlying.size(); ++x)
    EXPECT_EQ(cb.space.underlying[ps.map[x]], image(phi.map, ca.space.underlying[x]));
}

TEST(Coarsening, NaturalityOnCorpusMorphisms) {
  std::size_t checked = 0;
  for (const auto& src : corpus_upto(3))
    for (const auto& dst : corpus_upto(3)) {
      std::vector<Oid> map(src.size(), 0);
      for (;;) {
        bool ok = true;
        try {
          check_test_space_morphism(src, dst, map);
        } catch (const Error&) {
          ok = false;
        }
        if (ok) {
          ++checked;
          for (const auto& r : check_sharp_naturality(src, dst, map)) EXPECT_TRUE(r.holds) << r.law;
        }
        std::size_t i = 0;
        while (i < map.size() && ++map[i] == dst.size()) map[i++] = 0;
        if (i == map.size()) break;
      }
    }
  EXPECT_GT(checked, 0u);
}

TEST(Coarsening, KolmogorovCoherence) {
  for (std::size_t n = 1; n <= 3; ++n) {
    auto k = kolmogorov_model(n);
    auto c = validate_coherence(k.model, k.sharp, k.sigma);
    EXPECT_TRUE(is_cohesion(c));
    EXPECT_TRUE(sigma_constant_on_classes(c));
    EXPECT_TRUE(lemma5_classify(c).agree());
    EXPECT_TRUE(prop1_check(c));
    auto found = find_coherences(k.model, k.sharp);
    bool present = false;
    for (const auto& f : found) present = present || f.sigma.map == k.sigma.map;
    EXPECT_TRUE(present);
  }
}

TEST(Coarsening, TwoPointKolmogorovHasOneCoherence) {
  // σ({1},{2}) must complete the empty remainder of the test {12}.
  auto k = kolmogorov_model(2);
  EXPECT_EQ(find_coherences(k.model, k.sharp).size(), 1u);
}

TEST(Coarsening, SingleTestHasNoCoherence) {
  // No y with {c, y} a test.
  auto m = Model::full(single({"a", "b", "c"}));
  auto c = coarsen(m);
  EXPECT_TRUE(find_coherences(m, c).empty());
}

TEST(Coarsening, BrokenCoherencesAreRejected) {
  auto k = kolmogorov_model(2);
  auto code = [&](CoherenceMap s) {
    try {
      validate_coherence(k.model, k.sharp, s);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::LawViolation;
  };
  auto bad = k.sigma;
  bad.map.pop_back();
  EXPECT_EQ(code(bad), ErrorCode::NotCoherence);
  bad = k.sigma;
  std::swap(bad.map[0], bad.map[1]);
  EXPECT_EQ(code(bad), ErrorCode::NotCoherence);
  bad = k.sigma;
  bad.map[k.sharp.space.id_of(k.model.ts().test(0))] = 0;
  EXPECT_EQ(code(bad), ErrorCode::NotCoherence);
}

TEST(Coarsening, CohesionClassificationsAgreeOnCorpus) {
  std::size_t coherences = 0;
  for (const auto& m : corpus_models(corpus_upto(5))) {
    auto c = coarsen(m);
    for (const auto& coh : find_coherences(m, c)) {
      ++coherences;
      EXPECT_TRUE(lemma5_classify(coh).agree()) << m.ts().format(m.ts().all().members());
      if (is_regular(m.ts()) && is_cohesion(coh)) {
        EXPECT_TRUE(prop1_check(coh));
      }
    }
  }
  EXPECT_GT(coherences, 0u);
}

TEST(Coarsening, RegularityIsRequired) {
  auto m = Model::full(build_test_space({{"a", "b"}, {"a", "c"}, {"b", "c"}}));
  auto c = coarsen(m);
  auto found = find_coherences(m, c);
  for (const auto& coh : found) {
    try {
      prop1_check(coh);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::HypothesisUnmet);
    }
  }
}

TEST(Coarsening, LogicIsUnchangedByCoarsening) {
  for (const auto& ts : corpus_upto(4))
    if (is_algebraic(ts)) {
      EXPECT_TRUE(lemma3_isomorphism(ts)) << ts.format(ts.all().members());
    }
}

}  // namespace
