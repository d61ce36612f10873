#include <gtest/gtest.h>

#include "helpers.hpp"

using namespace okt;

namespace {

bool brute_morphism(const TestSpace& src, const TestSpace& dst, const std::vector<Oid>& map) {
  for (Oid x = 0; x < src.size(); ++x)
    for (Oid y = 0; y < src.size(); ++y)
      if (brute_orthogonal(src, x, y) && !brute_orthogonal(dst, map[x], map[y])) return false;
  auto ev = brute_events(dst);
  std::set<Event> evset(ev.begin(), ev.end());
  for (const auto& t : src.tests())
    if (!evset.count(image(map, t))) return false;
  for (const auto& e : src.tests())
    for (const auto& f : src.tests())
      if (!brute_perspective(dst, image(map, e), image(map, f))) return false;
  return true;
}

std::vector<std::vector<Oid>> all_maps(std::size_t n, std::size_t m) {
  std::vector<std::vector<Oid>> out;
  std::vector<Oid> cur(n, 0);
  for (;;) {
    out.push_back(cur);
    std::size_t i = 0;
    while (i < n && ++cur[i] == m) cur[i++] = 0;
    if (i == n) break;
  }
  return out;
}

TEST(Morphism, ConditionsMatchBruteForce) {
  std::size_t accepted = 0;
  for (const auto& src : corpus_upto(3))
    for (const auto& dst : corpus_upto(4))
      for (const auto& map : all_maps(src.size(), dst.size())) {
        bool lib = true;
        try {
          check_test_space_morphism(src, dst, map);
        } catch (const Error&) {
          lib = false;
        }
        ASSERT_EQ(lib, brute_morphism(src, dst, map)) << src.format(src.all().members()) << " -> "
                                                      << dst.format(dst.all().members());
        accepted += lib;
      }
  EXPECT_GT(accepted, 0u);
}

TEST(Morphism, PerspectivityIsPreserved) {
  for (const auto& src : corpus_upto(3))
    for (const auto& dst : corpus_upto(4))
      for (const auto& map : all_maps(src.size(), dst.size())) {
        if (!brute_morphism(src, dst, map)) continue;
        EXPECT_FALSE(lemma1_witness(src, dst, map).has_value());
        for (const auto& a : brute_events(src))
          for (const auto& b : brute_events(src))
            if (brute_perspective(src, a, b)) {
              ASSERT_TRUE(brute_perspective(dst, image(map, a), image(map, b)));
            }
      }
}

TEST(Morphism, ErrorCodes) {
  auto ab = single({"a", "b"});
  auto abc = single({"a", "b", "c"});
  auto w = wright();
  auto code = [](auto f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::LawViolation;
  };
  EXPECT_EQ(code([&] { check_test_space_morphism(ab, abc, {0, 0}); }), ErrorCode::NotLocallyInjective);
  EXPECT_EQ(code([&] { check_test_space_morphism(ab, abc, {0}); }), ErrorCode::DomainMismatch);
  EXPECT_EQ(code([&] { check_test_space_morphism(ab, abc, {0, 7}); }), ErrorCode::DomainMismatch);
  // x and q lie in no common test.
  EXPECT_EQ(code([&] { check_test_space_morphism(ab, w, {w.id("x"), w.id("q")}); }),
            ErrorCode::NotLocallyInjective);
  auto two = build_test_space({{"a", "b"}, {"c", "d"}});
  // {x} and {q} are not perspective.
  EXPECT_EQ(code([&] { check_test_space_morphism(two, w, {w.id("x"), w.id("y"), w.id("q"), w.id("z")}); }),
            ErrorCode::ImagesNotPerspective);
}

TEST(Morphism, FlagsAndIdentity) {
  auto a = Model::full(single({"a", "b"}));
  auto b = Model::full(build_test_space({{"a", "b"}, {"c", "d"}}));
  auto phi = validate_morphism(a, b, {0, 1});
  EXPECT_TRUE(phi.test_preserving);
  EXPECT_TRUE(phi.embedding);
  EXPECT_EQ(phi.pullback, PullbackStatus::Verified);
  auto psi = validate_morphism(b, a, {0, 1, 0, 1});
  EXPECT_TRUE(psi.test_preserving);
  EXPECT_FALSE(psi.embedding);
  EXPECT_TRUE(lemma2_check(phi, psi));
  auto id = identity_morphism(a);
  EXPECT_EQ(compose(psi, phi).map, id.map);
  EXPECT_EQ(compose(id, id), id);
  EXPECT_THROW(compose(phi, phi), Error);
  EXPECT_THROW(lemma2_check(psi, phi), Error);
}

TEST(Morphism, SubeventImageIsNotTestPreserving) {
  auto a = Model::full(single({"a"}));
  auto b = Model::full(single({"a", "b"}));
  auto phi = validate_morphism(a, b, {0});
  EXPECT_FALSE(phi.test_preserving);
  EXPECT_FALSE(phi.embedding);
}

TEST(Morphism, PullbackMustBeAState) {
  auto ts = single({"a", "b"});
  Model fair(ts, StateSpace::of({Weight{Rational(1, 2), Rational(1, 2)}}));
  auto full = Model::full(ts);
  try {
    validate_morphism(fair, full, {0, 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PullbackNotState);
  }
  auto phi = validate_morphism(full, fair, {0, 1});
  EXPECT_EQ(phi.pullback, PullbackStatus::Verified);
  EXPECT_EQ(validate_morphism(fair, fair, {1, 0}).pullback, PullbackStatus::Verified);
}

}  // namespace
