#pragma once

// Fixtures and brute-force oracles shared by the unit tests. Oracles only use the
// raw test lists, never the library's derived relations.

#include <set>

#include "orthokit/orthokit.hpp"

namespace okt {

using namespace orthokit;

inline TestSpace wright() { return build_test_space({{"x", "y", "z"}, {"q", "z"}}); }
inline TestSpace triangle() { return build_test_space({{"a", "x", "b"}, {"b", "y", "c"}, {"c", "z", "a"}}); }
inline TestSpace single(std::vector<std::string> t) { return build_test_space({t}); }

inline OutcomeSet ids(const TestSpace& ts, std::initializer_list<const char*> labels) {
  OutcomeSet s;
  for (auto l : labels) s.push_back(ts.id(l));
  return normalized(s);
}

/// Every subset of every test.
inline std::vector<Event> brute_events(const TestSpace& ts) {
  std::set<Event> out;
  for (const auto& t : ts.tests())
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << t.size()); ++m) {
      Event e;
      for (std::size_t i = 0; i < t.size(); ++i)
        if (m >> i & 1) e.push_back(t[i]);
      out.insert(e);
    }
  return {out.begin(), out.end()};
}

inline bool brute_test(const TestSpace& ts, const OutcomeSet& s) {
  for (const auto& t : ts.tests())
    if (t == s) return true;
  return false;
}

/// a ∼ b: some c disjoint from both completes each to a test.
inline bool brute_perspective(const TestSpace& ts, const Event& a, const Event& b) {
  for (const auto& t : ts.tests()) {
    bool sub = std::includes(t.begin(), t.end(), a.begin(), a.end());
    if (!sub) continue;
    Event c;
    std::set_difference(t.begin(), t.end(), a.begin(), a.end(), std::back_inserter(c));
    Event bc;
    std::set_union(b.begin(), b.end(), c.begin(), c.end(), std::back_inserter(bc));
    if (bc.size() == b.size() + c.size() && brute_test(ts, bc)) return true;
  }
  return false;
}

inline bool brute_orthogonal(const TestSpace& ts, Oid x, Oid y) {
  if (x == y) return false;
  for (const auto& t : ts.tests())
    if (std::binary_search(t.begin(), t.end(), x) && std::binary_search(t.begin(), t.end(), y)) return true;
  return false;
}

inline const std::vector<TestSpace>& corpus() { return standard_corpus(); }

/// Corpus spaces up to the given outcome count.
inline std::vector<TestSpace> corpus_upto(std::size_t n) {
  std::vector<TestSpace> out;
  for (const auto& ts : corpus())
    if (ts.size() <= n) out.push_back(ts);
  return out;
}

}  // namespace okt
