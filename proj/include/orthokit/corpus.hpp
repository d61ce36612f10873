#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "orthokit/quantum.hpp"
#include "orthokit/states.hpp"

namespace orthokit {

/// A test space on n points as sorted bitmasks over {0..n-1}.
struct MaskSpace {
  std::size_t n = 0;
  std::vector<std::uint32_t> tests;

  friend bool operator<(const MaskSpace& a, const MaskSpace& b) {
    return std::tie(a.n, a.tests) < std::tie(b.n, b.tests);
  }
  friend bool operator==(const MaskSpace& a, const MaskSpace& b) { return a.n == b.n && a.tests == b.tests; }
};

namespace detail {

inline std::uint32_t permute_mask(std::uint32_t m, const std::vector<std::size_t>& perm) {
  std::uint32_t out = 0;
  for (std::size_t i = 0; i < perm.size(); ++i)
    if (m & (1U << i)) out |= 1U << perm[i];
  return out;
}

inline std::string letter_label(std::size_t i) {
  std::string s(1, static_cast<char>('a' + i % 26));
  if (i >= 26) s += std::to_string(i / 26);
  return s;
}

}  // namespace detail

/// The lexicographically least relabeling: sorted descending masks, minimized over permutations.
inline MaskSpace canonical_form(const MaskSpace& s) {
  std::vector<std::size_t> perm(s.n);
  std::iota(perm.begin(), perm.end(), 0);
  MaskSpace best;
  bool first = true;
  do {
    MaskSpace c{s.n, {}};
    for (auto m : s.tests) c.tests.push_back(detail::permute_mask(m, perm));
    std::sort(c.tests.begin(), c.tests.end());
    if (first || c < best) {
      best = std::move(c);
      first = false;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

inline TestSpace to_test_space(const MaskSpace& s) {
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < s.n; ++i) labels.push_back(detail::letter_label(i));
  std::vector<OutcomeSet> tests;
  for (auto m : s.tests) {
    OutcomeSet t;
    for (Oid i = 0; i < s.n; ++i)
      if (m & (1U << i)) t.push_back(i);
    tests.push_back(std::move(t));
  }
  return TestSpace(std::move(labels), std::move(tests));
}

/**
 * @brief Every irredundant test space with at most `max_outcomes` outcomes and at most
 * `max_tests` tests, one per isomorphism class.
 *
 * Ordered by outcome count, then test count, then canonical masks.
 */
inline std::vector<MaskSpace> enumerate_mask_spaces(std::size_t max_outcomes, std::size_t max_tests,
                                                    std::size_t cap = default_cap()) {
  if (max_outcomes > 8) throw Error(ErrorCode::EnumerationCapExceeded, "at most 8 outcomes");
  std::set<std::tuple<std::size_t, std::size_t, std::vector<std::uint32_t>>> seen;
  for (std::size_t n = 1; n <= max_outcomes; ++n) {
    const std::uint32_t full = (1U << n) - 1;
    std::vector<std::uint32_t> chosen;
    std::function<void(std::uint32_t)> grow = [&](std::uint32_t next) {
      if (!chosen.empty()) {
        std::uint32_t u = 0;
        for (auto m : chosen) u |= m;
        if (u == full) {
          auto c = canonical_form(MaskSpace{n, chosen});
          seen.emplace(n, c.tests.size(), c.tests);
          check_cap(seen.size(), cap, "corpus");
        }
      }
      if (chosen.size() == max_tests) return;
      for (std::uint32_t m = next; m <= full; ++m) {
        bool antichain = std::all_of(chosen.begin(), chosen.end(), [&](std::uint32_t c) {
          return (c & m) != c && (c & m) != m;
        });
        if (!antichain) continue;
        chosen.push_back(m);
        grow(m + 1);
        chosen.pop_back();
      }
    };
    grow(1);
  }
  std::vector<MaskSpace> out;
  for (const auto& [n, k, t] : seen) out.push_back(MaskSpace{n, t});
  return out;
}

inline std::vector<TestSpace> enumerate_test_spaces(std::size_t max_outcomes, std::size_t max_tests,
                                                    std::size_t cap = default_cap()) {
  std::vector<TestSpace> out;
  for (const auto& m : enumerate_mask_spaces(max_outcomes, max_tests, cap)) out.push_back(to_test_space(m));
  return out;
}

/// FNV-1a over the canonical masks; stable across runs and platforms.
inline std::uint64_t corpus_hash(const std::vector<MaskSpace>& spaces) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xff;
      h *= 1099511628211ULL;
    }
  };
  for (const auto& s : spaces) {
    mix(s.n);
    mix(s.tests.size());
    for (auto m : s.tests) mix(m);
  }
  return h;
}

/// The spaces of the standard corpus: ≤ 6 outcomes, ≤ 3 tests.
inline const std::vector<TestSpace>& standard_corpus() {
  static const std::vector<TestSpace> c = enumerate_test_spaces(6, 3);
  return c;
}

/// Full models over the corpus spaces that admit a positive state for every outcome.
inline std::vector<Model> corpus_models(const std::vector<TestSpace>& spaces) {
  std::vector<Model> out;
  for (const auto& ts : spaces) {
    try {
      out.emplace_back(ts, StateSpace::full());
    } catch (const Error& e) {
      if (e.code() != ErrorCode::PositivityViolation) throw;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Named fixtures

inline const std::vector<std::string>& fixture_names() {
  static const std::vector<std::string> n{"wright",      "triangle",    "kolmogorov1", "kolmogorov2",
                                          "kolmogorov3", "kolmogorov4", "qubit-zx",    "semiclassical-2x2",
                                          "single-ab",   "single-abc"};
  return n;
}

/// Named models: Wright's E={x,y,z}, F={q,z}; the 3-test loop; Kolmogorov(n); a qubit with the
/// z and x frames; two disjoint 2-outcome tests; one test of size 2 or 3.
inline Model named(const std::string& name) {
  if (name == "wright") return Model::full(build_test_space({{"x", "y", "z"}, {"q", "z"}}));
  if (name == "triangle") return Model::full(build_test_space({{"a", "x", "b"}, {"b", "y", "c"}, {"c", "z", "a"}}));
  if (name.rfind("kolmogorov", 0) == 0 && name.size() == 11 && name[10] >= '1' && name[10] <= '4')
    return kolmogorov_model(static_cast<std::size_t>(name[10] - '0')).model;
  if (name == "qubit-zx") {
    const double r = 0.70710678118654752;
    Basis z{{"0", "1"}, {{1.0, 0.0}, {0.0, 1.0}}};
    Basis x{{"+", "-"}, {{r, r}, {r, -r}}};
    return hilbert_slice_model({z, x}, {Ensemble::pure({1.0, 0.0}), Ensemble::pure({0.0, 1.0})});
  }
  if (name == "semiclassical-2x2") return Model::full(build_test_space({{"a", "b"}, {"c", "d"}}));
  if (name == "single-ab") return Model::full(build_test_space({{"a", "b"}}));
  if (name == "single-abc") return Model::full(build_test_space({{"a", "b", "c"}}));
  throw Error(ErrorCode::UnknownName, "no fixture named " + name);
}

}  // namespace orthokit
