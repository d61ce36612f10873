#include <gtest/gtest.h>

#include "helpers.hpp"

using namespace okt;

namespace {

// Unique solution of the test equations with the given outcomes forced to zero, if any.
std::optional<Weight> solve_with_zeros(const TestSpace& ts, std::uint32_t zeros) {
  const std::size_t n = ts.size();
  std::vector<std::vector<Rational>> rows;
  for (const auto& t : ts.tests()) {
    std::vector<Rational> r(n + 1, 0);
    for (Oid x : t) r[x] = 1;
    r[n] = 1;
    rows.push_back(r);
  }
  for (Oid x = 0; x < n; ++x)
    if (zeros >> x & 1) {
      std::vector<Rational> r(n + 1, 0);
      r[x] = 1;
      rows.push_back(r);
    }
  std::size_t rank = 0;
  std::vector<std::size_t> pivots;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = rank;
    while (p < rows.size() && rows[p][c] == 0) ++p;
    if (p == rows.size()) continue;
    std::swap(rows[p], rows[rank]);
    Rational inv = 1 / rows[rank][c];
    for (auto& v : rows[rank]) v *= inv;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i == rank || rows[i][c] == 0) continue;
      Rational f = rows[i][c];
      for (std::size_t k = 0; k <= n; ++k) rows[i][k] -= f * rows[rank][k];
    }
    pivots.push_back(c);
    ++rank;
  }
  for (std::size_t i = rank; i < rows.size(); ++i)
    if (rows[i][n] != 0) return std::nullopt;
  if (rank < n) return std::nullopt;
  Weight w(n);
  for (std::size_t i = 0; i < rank; ++i) w[pivots[i]] = rows[i][n];
  return w;
}

std::vector<Weight> brute_vertices(const TestSpace& ts) {
  std::set<Weight> out;
  for (std::uint32_t z = 0; z < (1U << ts.size()); ++z) {
    auto w = solve_with_zeros(ts, z);
    if (!w) continue;
    bool ok = true;
    for (const auto& v : *w) ok = ok && sgn(v) >= 0;
    if (ok) out.insert(*w);
  }
  return {out.begin(), out.end()};
}

const std::vector<Model>& models() {
  static const std::vector<Model> m = corpus_models(corpus());
  return m;
}

TEST(States, VerticesMatchZeroSetSearch) {
  for (const auto& ts : corpus()) {
    auto v = enumerate_vertices(ts);
    ASSERT_TRUE(v.complete);
    ASSERT_EQ(v.vertices, brute_vertices(ts)) << ts.format(ts.all().members());
  }
}

TEST(States, WrightVertices) {
  auto v = enumerate_vertices(wright());
  // Dirac points on {x,q}, {y,q} and z.
  EXPECT_EQ(v.vertices.size(), 3u);
}

TEST(States, VerticesAreStates) {
  for (const auto& m : models()) {
    auto v = enumerate_vertices(m.ts());
    for (const auto& w : v.vertices) EXPECT_TRUE(contains_state(m, w));
  }
}

TEST(States, ContainsStateAndRay) {
  auto m = Model::full(wright());
  const auto& ts = m.ts();
  Weight w(4, 0);
  w[ts.id("x")] = Rational(1, 2);
  w[ts.id("z")] = Rational(1, 2);
  w[ts.id("q")] = Rational(1, 2);
  EXPECT_TRUE(contains_state(m, w));
  Weight twice = w;
  for (auto& v : twice) v *= 2;
  EXPECT_FALSE(contains_state(m, twice));
  EXPECT_TRUE(contains_ray(m, twice));
  EXPECT_TRUE(contains_ray(m, Weight(4, 0)));
  w[ts.id("q")] = Rational(1, 3);
  EXPECT_FALSE(contains_state(m, w));
  EXPECT_FALSE(contains_ray(m, w));
}

TEST(States, GeneratedStateSpace) {
  auto ts = single({"a", "b"});
  Weight half{Rational(1, 2), Rational(1, 2)};
  Weight quarter{Rational(1, 4), Rational(3, 4)};
  Model m(ts, StateSpace::of({half, quarter}));
  EXPECT_TRUE(contains_state(m, Weight{Rational(3, 8), Rational(5, 8)}));
  EXPECT_FALSE(contains_state(m, Weight{Rational(1), Rational(0)}));
  EXPECT_TRUE(contains_ray(m, Weight{Rational(1), Rational(1)}));
  EXPECT_FALSE(contains_ray(m, Weight{Rational(0), Rational(1)}));
  EXPECT_FALSE(check_unital(m).holds);
}

TEST(States, ModelRejectsBadGenerators) {
  auto ts = single({"a", "b"});
  try {
    Model(ts, StateSpace::of({Weight{Rational(1), Rational(1)}}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotAState);
  }
  try {
    Model(ts, StateSpace::of({Weight{Rational(1), Rational(0)}}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PositivityViolation);
  }
}

TEST(States, FloatScalarsUseTolerance) {
  auto ts = single({"a", "b"});
  ScalarConfig sc{ScalarKind::Float, 1e-6};
  Weight w{Rational(0.5), Rational(0.5000000001)};
  EXPECT_TRUE(is_probability_weight(ts, w, sc));
  EXPECT_FALSE(is_probability_weight(ts, w));
}

TEST(States, PositivityOfCorpus) {
  std::size_t positive = 0;
  for (const auto& ts : corpus()) {
    bool oracle = true;
    auto v = brute_vertices(ts);
    for (Oid x = 0; x < ts.size(); ++x) {
      bool some = false;
      for (const auto& w : v) some = some || sgn(w[x]) > 0;
      oracle = oracle && some;
    }
    positive += oracle;
  }
  EXPECT_EQ(positive, models().size());
}

TEST(States, UnitalityMatchesVertices) {
  for (const auto& m : models()) {
    auto v = brute_vertices(m.ts());
    std::vector<Oid> expect;
    for (Oid x = 0; x < m.ts().size(); ++x) {
      bool hit = false;
      for (const auto& w : v) hit = hit || w[x] == 1;
      if (!hit) expect.push_back(x);
    }
    EXPECT_EQ(check_unital(m).failing, expect);
  }
}

TEST(States, StrongUnitalityMatchesVertices) {
  // The face α(x) = 1 is spanned by the vertices on it.
  for (const auto& m : models()) {
    const auto& ts = m.ts();
    auto v = brute_vertices(ts);
    std::vector<std::pair<Oid, Oid>> expect;
    for (Oid x = 0; x < ts.size(); ++x)
      for (Oid y = 0; y < ts.size(); ++y) {
        if (brute_orthogonal(ts, x, y)) continue;
        bool ok = false;
        for (const auto& w : v) ok = ok || (w[x] == 1 && sgn(w[y]) > 0);
        if (!ok) expect.emplace_back(x, y);
      }
    EXPECT_EQ(check_strongly_unital(m).failing, expect);
  }
}

TEST(States, PairwiseLoopIsNotStronglyUnital) {
  auto m = Model::full(build_test_space({{"a", "b"}, {"a", "c"}, {"b", "c"}}));
  EXPECT_FALSE(check_unital(m).holds);
  auto su = check_strongly_unital(m);
  EXPECT_FALSE(su.holds);
  for (auto [x, y] : su.failing) EXPECT_EQ(x, y);
  EXPECT_FALSE(is_regular(m.ts()));
}

TEST(States, StronglyUnitalImpliesUnitalAndRegular) {
  for (const auto& m : models())
    if (check_strongly_unital(m).holds) {
      EXPECT_TRUE(check_unital(m).holds);
      EXPECT_TRUE(is_regular(m.ts()));
    }
}

TEST(States, CertainEventsAreTests) {
  for (const auto& m : models()) {
    auto v = brute_vertices(m.ts());
    for (const auto& a : brute_events(m.ts())) {
      bool certain = true;
      for (const auto& w : v) certain = certain && weight_of_event(w, a) == 1;
      EXPECT_EQ(lemma0_check(m, a), certain);
      if (certain) {
        EXPECT_TRUE(brute_test(m.ts(), a));
      }
    }
  }
}

TEST(States, CertaintyOnANonTestIsRejected) {
  auto ts = single({"a", "b"});
  auto m = Model::trusted(ts, StateSpace::of({Weight{Rational(1), Rational(0)}}));
  EXPECT_TRUE(lemma0_check(m, {0, 1}));
  try {
    lemma0_check(m, {0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PositivityViolation);
  }
}

TEST(States, SamplesAreStates) {
  for (const auto& m : models()) {
    for (const auto& w : sample_states(m, 4, 7)) EXPECT_TRUE(contains_state(m, w));
  }
}

TEST(States, GeneratorsOfFullModelAreVertices) {
  auto m = Model::full(wright());
  auto g = state_generators(m);
  ASSERT_TRUE(g);
  EXPECT_EQ(*g, brute_vertices(m.ts()));
}

}  // namespace
