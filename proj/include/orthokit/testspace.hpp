#pragma once

#include <map>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "orthokit/common.hpp"

namespace orthokit {

/**
 * @brief Finite test space: interned outcomes plus an antichain of tests.
 *
 * Immutable after construction. Tests are stored sorted by their id sequence.
 */
class TestSpace {
 public:
  TestSpace() = default;

  /// Builds from interned labels and id-based tests; rejects empty and redundant tests.
  TestSpace(std::vector<std::string> labels, std::vector<OutcomeSet> tests)
      : labels_(std::move(labels)) {
    for (Oid i = 0; i < labels_.size(); ++i) {
      if (!label_index_.emplace(labels_[i], i).second)
        throw Error(ErrorCode::LabelCollision, "duplicate label '" + labels_[i] + "'");
    }
    if (tests.empty()) throw Error(ErrorCode::EmptyTest, "test space has no tests");
    for (auto& t : tests) {
      t = normalized(std::move(t));
      if (t.empty()) throw Error(ErrorCode::EmptyTest, "empty test");
      if (t.back() >= labels_.size())
        throw Error(ErrorCode::UnknownLabel, "outcome id out of range");
    }
    std::sort(tests.begin(), tests.end());
    tests.erase(std::unique(tests.begin(), tests.end()), tests.end());
    tests_ = std::move(tests);

    const std::size_t n = labels_.size();
    tests_of_.assign(n, {});
    test_bits_.reserve(tests_.size());
    for (std::size_t i = 0; i < tests_.size(); ++i) {
      test_bits_.emplace_back(n, tests_[i]);
      for (Oid x : tests_[i]) tests_of_[x].push_back(i);
    }
    for (Oid x = 0; x < n; ++x) {
      if (tests_of_[x].empty())
        throw Error(ErrorCode::UnknownLabel, "outcome '" + labels_[x] + "' lies in no test");
    }
    check_irredundant();

    perp_.assign(n, Bits(n));
    for (const auto& t : tests_)
      for (Oid x : t)
        for (Oid y : t)
          if (x != y) perp_[x].set(y);
    test_index_.reserve(tests_.size());
    for (std::size_t i = 0; i < tests_.size(); ++i) test_index_.emplace(test_bits_[i], i);
  }

  std::size_t size() const { return labels_.size(); }
  std::size_t test_count() const { return tests_.size(); }

  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& label(Oid x) const { return labels_.at(x); }

  std::optional<Oid> find(const std::string& label) const {
    auto it = label_index_.find(label);
    if (it == label_index_.end()) return std::nullopt;
    return it->second;
  }
  Oid id(const std::string& label) const {
    auto r = find(label);
    if (!r) throw Error(ErrorCode::UnknownLabel, "unknown label '" + label + "'");
    return *r;
  }

  const std::vector<OutcomeSet>& tests() const { return tests_; }
  const OutcomeSet& test(std::size_t i) const { return tests_.at(i); }
  const Bits& test_bits(std::size_t i) const { return test_bits_.at(i); }
  const std::vector<std::size_t>& tests_containing(Oid x) const { return tests_of_.at(x); }

  bool orthogonal(Oid x, Oid y) const { return perp_.at(x).test(y); }
  const Bits& perp(Oid x) const { return perp_.at(x); }

  Bits bits(const OutcomeSet& s) const { return Bits(size(), s); }
  Bits all() const {
    Bits b(size());
    for (Oid x = 0; x < size(); ++x) b.set(x);
    return b;
  }

  /// s^⊥ as a bitset: outcomes orthogonal to every member of s (∅^⊥ = X).
  Bits perp_of(const Bits& s) const {
    Bits out = all();
    std::size_t x = s.first();
    if (x == Bits::npos) return out;
    for (Oid y : s.members()) out &= perp_[y];
    return out;
  }

  std::optional<std::size_t> test_index(const Bits& s) const {
    auto it = test_index_.find(s);
    if (it == test_index_.end()) return std::nullopt;
    return it->second;
  }
  bool is_test(const OutcomeSet& s) const { return test_index(bits(s)).has_value(); }

  /// Smallest-index test containing s (any test when s is empty).
  std::optional<std::size_t> find_test_containing(const Bits& s) const {
    std::size_t best = Bits::npos;
    std::size_t best_len = static_cast<std::size_t>(-1);
    for (Oid x : s.members()) {
      if (tests_of_[x].size() < best_len) {
        best_len = tests_of_[x].size();
        best = x;
      }
    }
    if (best == Bits::npos) return std::size_t{0};
    for (std::size_t t : tests_of_[best])
      if (s.subset_of(test_bits_[t])) return t;
    return std::nullopt;
  }
  bool is_event(const Bits& s) const { return find_test_containing(s).has_value(); }
  bool is_event(const OutcomeSet& s) const {
    if (!s.empty() && s.back() >= size()) return false;
    return is_event(bits(s));
  }

  std::string format(const OutcomeSet& s) const {
    std::string out = "{";
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (i) out += ",";
      out += labels_[s[i]];
    }
    return out + "}";
  }

 private:
  void check_irredundant() const {
    for (std::size_t i = 0; i < tests_.size(); ++i) {
      // Only tests sharing the first outcome of test i can contain it.
      for (std::size_t j : tests_of_[tests_[i].front()]) {
        if (i == j) continue;
        if (test_bits_[i].subset_of(test_bits_[j]))
          throw Error(ErrorCode::RedundantTests,
                      format(tests_[i]) + " is a proper subset of " + format(tests_[j]));
      }
    }
  }

  std::vector<std::string> labels_;
  std::unordered_map<std::string, Oid> label_index_;
  std::vector<OutcomeSet> tests_;
  std::vector<Bits> test_bits_;
  std::vector<std::vector<std::size_t>> tests_of_;
  std::vector<Bits> perp_;
  std::unordered_map<Bits, std::size_t, BitsHash> test_index_;
};

/// Label-level constructor; every label must be used by some test.
inline TestSpace build_test_space(const std::vector<std::string>& labels,
                                  const std::vector<std::vector<std::string>>& tests) {
  std::unordered_map<std::string, Oid> index;
  for (Oid i = 0; i < labels.size(); ++i) {
    if (!index.emplace(labels[i], i).second)
      throw Error(ErrorCode::LabelCollision, "duplicate label '" + labels[i] + "'");
  }
  std::vector<OutcomeSet> ids;
  ids.reserve(tests.size());
  for (const auto& t : tests) {
    if (t.empty()) throw Error(ErrorCode::EmptyTest, "empty test");
    OutcomeSet s;
    for (const auto& l : t) {
      auto it = index.find(l);
      if (it == index.end()) throw Error(ErrorCode::UnknownLabel, "unknown label '" + l + "'");
      s.push_back(it->second);
    }
    ids.push_back(normalized(std::move(s)));
  }
  return TestSpace(labels, std::move(ids));
}

/// Convenience: labels are collected from the tests in first-seen order.
inline TestSpace build_test_space(const std::vector<std::vector<std::string>>& tests) {
  std::vector<std::string> labels;
  std::unordered_set<std::string> seen;
  for (const auto& t : tests)
    for (const auto& l : t)
      if (seen.insert(l).second) labels.push_back(l);
  return build_test_space(labels, tests);
}

// ---------------------------------------------------------------------------
// Events, orthogonality, complements, perspectivity

/// All events (subsets of tests, deduplicated, including ∅) in lexicographic order.
inline std::vector<Event> events(const TestSpace& ts, std::size_t cap = default_cap()) {
  std::unordered_set<Bits, BitsHash> seen;
  for (const auto& t : ts.tests()) {
    if (t.size() >= 63 || (std::size_t{1} << t.size()) > cap)
      throw Error(ErrorCode::EnumerationCapExceeded,
                  "events of a test with " + std::to_string(t.size()) + " outcomes exceed cap " +
                      std::to_string(cap));
    const std::size_t m = t.size();
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
      Bits b(ts.size());
      for (std::size_t k = 0; k < m; ++k)
        if ((mask >> k) & 1U) b.set(t[k]);
      seen.insert(std::move(b));
      check_cap(seen.size(), cap, "event enumeration");
    }
  }
  std::vector<Event> out;
  out.reserve(seen.size());
  for (const auto& b : seen) out.push_back(b.members());
  std::sort(out.begin(), out.end());
  return out;
}

inline bool events_orthogonal(const TestSpace& ts, const Event& a, const Event& b) {
  return disjoint(a, b) && ts.is_event(set_union(a, b));
}

inline bool complementary(const TestSpace& ts, const Event& a, const Event& b) {
  return disjoint(a, b) && ts.is_test(set_union(a, b));
}

/// All complements E \ a of an event a, deduplicated and sorted.
inline std::vector<Event> complements(const TestSpace& ts, const Event& a) {
  std::vector<Event> out;
  Bits ab = ts.bits(a);
  auto push = [&](std::size_t t) {
    if (ab.subset_of(ts.test_bits(t))) out.push_back((ts.test_bits(t) - ab).members());
  };
  if (a.empty()) {
    for (std::size_t t = 0; t < ts.test_count(); ++t) push(t);
  } else {
    Oid rare = a.front();
    for (Oid x : a)
      if (ts.tests_containing(x).size() < ts.tests_containing(rare).size()) rare = x;
    for (std::size_t t : ts.tests_containing(rare)) push(t);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// Lexicographically least common complement of a and b, if any.
inline std::optional<Event> perspective(const TestSpace& ts, const Event& a, const Event& b) {
  auto ca = complements(ts, a);
  auto cb = complements(ts, b);
  std::vector<Event> common;
  std::set_intersection(ca.begin(), ca.end(), cb.begin(), cb.end(), std::back_inserter(common));
  if (common.empty()) return std::nullopt;
  return common.front();
}

inline bool perspective_events(const TestSpace& ts, const Event& a, const Event& b) {
  return perspective(ts, a, b).has_value();
}

// ---------------------------------------------------------------------------
// Structural predicates

struct TripleWitness {
  Event a, b, c;
};
struct PairWitness {
  Event a, b;
};

/**
 * @brief Algebraicity: a ∼ b and b oc c imply a oc c.
 *
 * Works over test triples. With E = a∪d, F = b∪d, G = b∪c the hypothesis reduces
 * to F\G ⊆ E, and a∪c always equals (E\F) ∪ (G\F) ∪ (E∩F∩G); disjointness needs
 * (E∩G) ⊆ F. The returned witness uses the axis d = F\G.
 */
inline std::optional<TripleWitness> algebraic_witness(const TestSpace& ts) {
  const std::size_t m = ts.test_count();
  const std::size_t words = (m + 63) / 64;
  // posting[x]: bitset over tests containing x.
  std::vector<std::vector<std::uint64_t>> posting(ts.size(), std::vector<std::uint64_t>(words, 0));
  for (std::size_t t = 0; t < m; ++t)
    for (Oid x : ts.test(t)) posting[x][t >> 6] |= (std::uint64_t{1} << (t & 63));

  std::vector<std::uint64_t> cand(words);
  for (std::size_t f = 0; f < m; ++f) {
    const Bits& F = ts.test_bits(f);
    for (std::size_t g = 0; g < m; ++g) {
      if (g == f) continue;
      const Bits& G = ts.test_bits(g);
      Bits FminusG = F - G;
      // Candidates E ⊇ F\G.
      auto members = FminusG.members();
      std::fill(cand.begin(), cand.end(), ~std::uint64_t{0});
      bool empty = false;
      for (Oid x : members) {
        bool anyw = false;
        for (std::size_t w = 0; w < words; ++w) {
          cand[w] &= posting[x][w];
          anyw |= cand[w] != 0;
        }
        if (!anyw) {
          empty = true;
          break;
        }
      }
      if (empty) continue;
      for (std::size_t w = 0; w < words; ++w) {
        std::uint64_t bitsw = cand[w];
        while (bitsw) {
          std::size_t e = w * 64 + static_cast<std::size_t>(__builtin_ctzll(bitsw));
          bitsw &= bitsw - 1;
          if (e >= m || e == f) continue;
          const Bits& E = ts.test_bits(e);
          Bits EG = (E & G) - F;
          Bits Z = ((E - F) | (G - F)) | ((E & F) & G);
          if (EG.none() && ts.test_index(Z)) continue;
          Bits d = FminusG;
          return TripleWitness{(E - d).members(), (F & G).members(), (G - F).members()};
        }
      }
    }
  }
  return std::nullopt;
}

inline bool is_algebraic(const TestSpace& ts) { return !algebraic_witness(ts).has_value(); }

/**
 * @brief Coherence: a ⊆ b^⊥ implies a ⊥ b.
 *
 * Adding outcomes one at a time shows it suffices to take b = {x}, and a may be
 * enlarged to E ∩ x^⊥ for the test E holding it.
 */
inline std::optional<PairWitness> coherent_witness(const TestSpace& ts) {
  for (std::size_t e = 0; e < ts.test_count(); ++e) {
    const Bits& E = ts.test_bits(e);
    for (Oid x = 0; x < ts.size(); ++x) {
      if (E.test(x)) continue;
      Bits a = E & ts.perp(x);
      Bits u = a;
      u.set(x);
      if (!ts.is_event(u)) return PairWitness{a.members(), Event{x}};
    }
  }
  return std::nullopt;
}

inline bool is_coherent(const TestSpace& ts) { return !coherent_witness(ts).has_value(); }

/**
 * @brief Regularity: a ∼ b implies a^⊥ = b^⊥.
 *
 * Perspective pairs are E\d, F\d for d ⊆ E∩F; the condition for all d follows from
 * the case d = E∩F, so only (E\F)^⊥ = (F\E)^⊥ is compared.
 */
inline std::optional<PairWitness> regular_witness(const TestSpace& ts) {
  for (std::size_t e = 0; e < ts.test_count(); ++e) {
    for (std::size_t f = e + 1; f < ts.test_count(); ++f) {
      Bits a = ts.test_bits(e) - ts.test_bits(f);
      Bits b = ts.test_bits(f) - ts.test_bits(e);
      if (ts.perp_of(a) != ts.perp_of(b)) return PairWitness{a.members(), b.members()};
    }
  }
  return std::nullopt;
}

inline bool is_regular(const TestSpace& ts) { return !regular_witness(ts).has_value(); }

/// Projectivity: {x} ∼ {y} forces x = y; fails exactly when two tests differ by one outcome each.
inline std::optional<PairWitness> projective_witness(const TestSpace& ts) {
  for (std::size_t e = 0; e < ts.test_count(); ++e) {
    for (std::size_t f = e + 1; f < ts.test_count(); ++f) {
      Bits a = ts.test_bits(e) - ts.test_bits(f);
      Bits b = ts.test_bits(f) - ts.test_bits(e);
      if (a.count() == 1 && b.count() == 1) return PairWitness{a.members(), b.members()};
    }
  }
  return std::nullopt;
}

inline bool is_projective(const TestSpace& ts) { return !projective_witness(ts).has_value(); }

// ---------------------------------------------------------------------------
// Ortho-closed sets

inline OutcomeSet ortho_complement(const TestSpace& ts, const OutcomeSet& a) {
  return ts.perp_of(ts.bits(a)).members();
}

inline OutcomeSet ortho_closure(const TestSpace& ts, const OutcomeSet& a) {
  return ts.perp_of(ts.perp_of(ts.bits(a))).members();
}

/// The complete ortholattice C(X,⊥) of sets with a = a^⊥⊥.
class OrthoLattice {
 public:
  OrthoLattice(const TestSpace& ts, std::size_t cap = default_cap()) : ts_(&ts) {
    // Closed sets are exactly the intersections of the sets {x}^⊥, together with X.
    std::unordered_set<Bits, BitsHash> seen;
    std::vector<Bits> frontier;
    auto add = [&](Bits b) {
      if (seen.insert(b).second) {
        check_cap(seen.size(), cap, "ortho-closed lattice");
        frontier.push_back(std::move(b));
      }
    };
    add(ts.all());
    for (Oid x = 0; x < ts.size(); ++x) add(ts.perp(x));
    std::vector<Bits> generators;
    for (Oid x = 0; x < ts.size(); ++x) generators.push_back(ts.perp(x));
    while (!frontier.empty()) {
      Bits cur = std::move(frontier.back());
      frontier.pop_back();
      for (const auto& g : generators) add(cur & g);
    }
    for (const auto& b : seen) elements_.push_back(b.members());
    std::sort(elements_.begin(), elements_.end(), [](const OutcomeSet& l, const OutcomeSet& r) {
      return l.size() != r.size() ? l.size() < r.size() : l < r;
    });
    for (std::size_t i = 0; i < elements_.size(); ++i) index_.emplace(elements_[i], i);
  }

  std::size_t size() const { return elements_.size(); }
  const std::vector<OutcomeSet>& elements() const { return elements_; }
  const OutcomeSet& element(std::size_t i) const { return elements_.at(i); }
  std::optional<std::size_t> index_of(const OutcomeSet& s) const {
    auto it = index_.find(s);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t complement(std::size_t i) const { return lookup(ortho_complement(*ts_, elements_[i])); }
  std::size_t meet(std::size_t i, std::size_t j) const {
    return lookup(set_intersection(elements_[i], elements_[j]));
  }
  std::size_t join(std::size_t i, std::size_t j) const {
    return lookup(ortho_closure(*ts_, set_union(elements_[i], elements_[j])));
  }
  bool leq(std::size_t i, std::size_t j) const { return is_subset(elements_[i], elements_[j]); }

 private:
  std::size_t lookup(const OutcomeSet& s) const {
    auto r = index_of(s);
    if (!r) throw Error(ErrorCode::LawViolation, "ortho-closed lattice not closed under operation");
    return *r;
  }

  const TestSpace* ts_;
  std::vector<OutcomeSet> elements_;
  std::map<OutcomeSet, std::size_t> index_;
};

// ---------------------------------------------------------------------------
// Supports, core, adjoined unit test

/// Decision via events: a ∼ b and a∩S = ∅ imply b∩S = ∅ (complement search per event).
inline bool support_by_perspectivity(const TestSpace& ts, const OutcomeSet& s,
                                     std::size_t cap = default_cap()) {
  Bits sb = ts.bits(s);
  for (const auto& a : events(ts, cap)) {
    if (ts.bits(a).intersects(sb)) continue;
    for (const auto& c : complements(ts, a)) {
      // Every b with b oc c is perspective to a.
      for (const auto& b : complements(ts, c))
        if (ts.bits(b).intersects(sb)) return false;
    }
  }
  return true;
}

/// S is a support iff {E ∩ S} is irredundant.
inline bool is_support(const TestSpace& ts, const OutcomeSet& s) {
  Bits sb = ts.bits(normalized(s));
  std::vector<Bits> cut;
  for (std::size_t t = 0; t < ts.test_count(); ++t) cut.push_back(ts.test_bits(t) & sb);
  bool ok = true;
  for (std::size_t i = 0; i < cut.size() && ok; ++i)
    for (std::size_t j = 0; j < cut.size(); ++j)
      if (i != j && cut[i] != cut[j] && cut[i].subset_of(cut[j])) {
        ok = false;
        break;
      }
#ifndef NDEBUG
  // Cross-check against the perspectivity criterion when events are few.
  std::size_t budget = 0;
  for (const auto& t : ts.tests()) budget += t.size() < 20 ? (std::size_t{1} << t.size()) : (1U << 20);
  if (budget <= 4096 && ok != support_by_perspectivity(ts, normalized(s)))
    throw Error(ErrorCode::LawViolation, "support criteria disagree");
#endif
  return ok;
}

/// Cor = ⋂ℳ.
inline Event core(const TestSpace& ts) {
  Bits acc = ts.all();
  for (std::size_t t = 0; t < ts.test_count(); ++t) acc &= ts.test_bits(t);
  return acc.members();
}

/// A′: adds a fresh outcome e and the test {e}.
inline TestSpace adjoin_unit_test(const TestSpace& ts, const std::string& label) {
  if (ts.find(label))
    throw Error(ErrorCode::LabelCollision, "label '" + label + "' already present");
  auto labels = ts.labels();
  labels.push_back(label);
  auto tests = ts.tests();
  tests.push_back(OutcomeSet{static_cast<Oid>(labels.size() - 1)});
  return TestSpace(std::move(labels), std::move(tests));
}

}  // namespace orthokit
