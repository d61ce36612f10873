#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "orthokit/coarsening.hpp"
#include "orthokit/logic.hpp"
#include "orthokit/morphism.hpp"

namespace orthokit {

// ===========================================================================
// Forward products

/// Test space of A⃗B. Outcome (x,y) has id x·|X(B)| + y.
struct FpSpace {
  TestSpace a;
  TestSpace b;
  TestSpace ts;

  Oid pair(Oid x, Oid y) const { return static_cast<Oid>(x * b.size() + y); }
  Oid first(Oid o) const { return static_cast<Oid>(o / b.size()); }
  Oid second(Oid o) const { return static_cast<Oid>(o % b.size()); }

  /// a = ⋃_{x∈a_o} x·a_x, with every a_x nonempty.
  struct Decomposition {
    OutcomeSet base;
    std::map<Oid, OutcomeSet> fibre;
  };

  Decomposition decompose(const Event& e) const {
    Decomposition d;
    for (Oid o : e) d.fibre[first(o)].push_back(second(o));
    for (auto& [x, f] : d.fibre) {
      d.base.push_back(x);
      f = normalized(std::move(f));
    }
    return d;
  }
};

namespace detail {

inline double power_count(double base, std::size_t exp) {
  return std::pow(base, static_cast<double>(exp));
}

/// Calls f(choice) for every tuple in {0..k-1}^n.
template <class F>
void for_each_tuple(std::size_t n, std::size_t k, F&& f) {
  std::vector<std::size_t> idx(n, 0);
  if (k == 0 && n > 0) return;
  for (;;) {
    f(idx);
    std::size_t i = 0;
    while (i < n && ++idx[i] == k) idx[i++] = 0;
    if (i == n) return;
  }
}

}  // namespace detail

inline FpSpace forward_product_space(const TestSpace& a, const TestSpace& b,
                                     std::size_t cap = default_cap()) {
  double total = 0;
  for (const auto& e : a.tests()) total += detail::power_count(b.test_count(), e.size());
  if (total > static_cast<double>(cap))
    throw Error(ErrorCode::EnumerationCapExceeded, "forward product has too many tests");
  FpSpace fp{a, b, TestSpace()};
  std::vector<std::string> labels;
  for (Oid x = 0; x < a.size(); ++x)
    for (Oid y = 0; y < b.size(); ++y) labels.push_back("(" + a.label(x) + "," + b.label(y) + ")");
  std::vector<OutcomeSet> tests;
  for (const auto& e : a.tests()) {
    detail::for_each_tuple(e.size(), b.test_count(), [&](const std::vector<std::size_t>& choice) {
      OutcomeSet t;
      for (std::size_t i = 0; i < e.size(); ++i)
        for (Oid y : b.test(choice[i])) t.push_back(fp.pair(e[i], y));
      tests.push_back(normalized(std::move(t)));
    });
  }
  fp.ts = TestSpace(std::move(labels), std::move(tests));
  return fp;
}

/// (α;β)(x,y) = α(x)·β_x(y).
inline Weight pair_state(const FpSpace& fp, const Weight& alpha, const std::vector<Weight>& beta) {
  Weight w(fp.ts.size());
  for (Oid x = 0; x < fp.a.size(); ++x)
    for (Oid y = 0; y < fp.b.size(); ++y) w[fp.pair(x, y)] = alpha[x] * beta.at(x)[y];
  return w;
}

/// α⊗β: the pair state with constant β.
inline Weight product_state(const FpSpace& fp, const Weight& alpha, const Weight& beta) {
  return pair_state(fp, alpha, std::vector<Weight>(fp.a.size(), beta));
}

struct ForwardProduct {
  FpSpace space;
  Model model;
};

inline ScalarConfig combine_scalars(const ScalarConfig& a, const ScalarConfig& b) {
  if (a.kind == ScalarKind::Float || b.kind == ScalarKind::Float)
    return {ScalarKind::Float, std::max(a.kind == ScalarKind::Float ? a.tau : 0.0,
                                        b.kind == ScalarKind::Float ? b.tau : 0.0)};
  return {};
}

/**
 * @brief A⃗B. Full ⊗ full is full; otherwise Ω is generated by all (α;β) with α and
 * every β_x drawn from the generators (full factors contribute their polytope vertices).
 */
inline ForwardProduct forward_product(const Model& a, const Model& b, std::size_t cap = default_cap(),
                                      std::size_t generator_cap = 4096) {
  FpSpace fp = forward_product_space(a.ts(), b.ts(), cap);
  ScalarConfig sc = combine_scalars(a.scalar(), b.scalar());
  if (a.omega().is_full() && b.omega().is_full()) {
    TestSpace ts = fp.ts;
    return ForwardProduct{std::move(fp), Model::trusted(std::move(ts), StateSpace::full(), sc)};
  }
  auto gens_of = [&](const Model& m) {
    if (!m.omega().is_full()) return m.omega().generators;
    auto v = enumerate_vertices(m.ts(), generator_cap);
    if (!v.complete) throw Error(ErrorCode::EnumerationCapExceeded, "vertex enumeration for a full factor");
    return v.vertices;
  };
  auto ga = gens_of(a), gb = gens_of(b);
  if (static_cast<double>(ga.size()) * detail::power_count(gb.size(), a.ts().size()) >
      static_cast<double>(generator_cap))
    throw Error(ErrorCode::EnumerationCapExceeded, "too many (α;β) generator pairs");
  std::vector<Weight> gens;
  for (const auto& alpha : ga)
    detail::for_each_tuple(a.ts().size(), gb.size(), [&](const std::vector<std::size_t>& choice) {
      std::vector<Weight> beta;
      for (auto c : choice) beta.push_back(gb[c]);
      gens.push_back(pair_state(fp, alpha, beta));
    });
  TestSpace ts = fp.ts;
  return ForwardProduct{std::move(fp), Model::trusted(std::move(ts), StateSpace::of(std::move(gens)), sc)};
}

/// (x,y) ⊥ (u,v) iff x ⊥ u, or x = u and y ⊥ v; compared with the generic relation.
inline bool fp_orthogonality_matches(const FpSpace& fp) {
  for (Oid p = 0; p < fp.ts.size(); ++p)
    for (Oid q = 0; q < fp.ts.size(); ++q) {
      Oid x = fp.first(p), y = fp.second(p), u = fp.first(q), v = fp.second(q);
      bool formula = fp.a.orthogonal(x, u) || (x == u && fp.b.orthogonal(y, v));
      if (formula != fp.ts.orthogonal(p, q)) return false;
    }
  return true;
}

/**
 * @brief Perspectivity in A⃗B decided from the decompositions of a and b.
 *
 * a ∼ b iff a_o ∼ b_o, a_z ∼ b_z for z ∈ a_o∩b_o, and the fibres over
 * a_o∖b_o and b_o∖a_o are tests of B.
 */
inline bool fp_perspective_criterion(const FpSpace& fp, const Event& a, const Event& b) {
  auto da = fp.decompose(a), db = fp.decompose(b);
  if (!perspective_events(fp.a, da.base, db.base)) return false;
  for (const auto& [x, ax] : da.fibre) {
    auto it = db.fibre.find(x);
    if (it == db.fibre.end()) {
      if (!fp.b.is_test(ax)) return false;
    } else if (!perspective_events(fp.b, ax, it->second)) {
      return false;
    }
  }
  for (const auto& [y, by] : db.fibre)
    if (!da.fibre.count(y) && !fp.b.is_test(by)) return false;
  return true;
}

/// Criterion value; in debug builds also compared with common-complement search.
inline bool fp_perspectivity(const FpSpace& fp, const Event& a, const Event& b) {
  bool v = fp_perspective_criterion(fp, a, b);
#ifndef NDEBUG
  if (v != perspective_events(fp.ts, a, b))
    throw Error(ErrorCode::LawViolation, "decomposition criterion disagrees with complement search");
#endif
  return v;
}

/// Cor(φ(ℳ(A))) as a set of target outcomes.
inline OutcomeSet image_core(const Morphism& phi) {
  const TestSpace& src = phi.source->ts();
  OutcomeSet acc = image(phi.map, src.test(0));
  for (const auto& t : src.tests()) acc = set_intersection(acc, image(phi.map, t));
  return acc;
}

/**
 * @brief (φ;ψ)(x,y) = (φ(x), ψ_x(y)) between forward products.
 *
 * Decided by the core criterion (ψ_x test-preserving whenever φ(x) lies outside the
 * core of φ(ℳ)) and, independently, by generic validation; the two must agree.
 * @throws NotAMorphism naming the violating x.
 */
inline Morphism fp_pair_morphism(const Morphism& phi, const std::vector<Morphism>& psi,
                                 const ForwardProduct& src, const ForwardProduct& dst) {
  const FpSpace& s = src.space;
  const FpSpace& d = dst.space;
  if (psi.size() != s.a.size()) throw Error(ErrorCode::DomainMismatch, "need one ψ_x per outcome x");
  std::vector<Oid> map(s.ts.size());
  for (Oid x = 0; x < s.a.size(); ++x)
    for (Oid y = 0; y < s.b.size(); ++y) map[s.pair(x, y)] = d.pair(phi.map[x], psi[x].map[y]);

  OutcomeSet cor = image_core(phi);
  std::optional<Oid> violator;
  for (Oid x = 0; x < s.a.size() && !violator; ++x)
    if (!contains(cor, phi.map[x]) && !psi[x].test_preserving) violator = x;

  std::optional<Morphism> generic;
  std::string why;
  try {
    generic = validate_morphism(src.model, dst.model, map);
  } catch (const Error& e) {
    why = e.what();
  }
  if (generic.has_value() == violator.has_value())
    throw Error(ErrorCode::LawViolation, "core criterion and generic validation disagree");
  if (violator)
    throw Error(ErrorCode::NotAMorphism, "ψ_" + s.a.label(*violator) +
                                             " is not test-preserving outside the core (" + why + ")");
  return *generic;
}

// ---------------------------------------------------------------------------
// Marginals and conditionals

/// ω₁(x) = ω(xF), checked to be independent of F.
inline Weight marginal(const FpSpace& fp, const Weight& omega, const ScalarConfig& sc = {}) {
  Weight m(fp.a.size());
  for (Oid x = 0; x < fp.a.size(); ++x) {
    for (std::size_t f = 0; f < fp.b.test_count(); ++f) {
      Rational v = 0;
      for (Oid y : fp.b.test(f)) v += omega[fp.pair(x, y)];
      if (f == 0) m[x] = v;
      else if (!sc.eq(m[x], v))
        throw Error(ErrorCode::LawViolation, "ω(xF) depends on F at x=" + fp.a.label(x));
    }
  }
  return m;
}

/// ω_{2|x}(y) = ω(x,y)/ω₁(x).
inline Weight conditional(const FpSpace& fp, const Weight& omega, Oid x, const ScalarConfig& sc = {}) {
  Weight m = marginal(fp, omega, sc);
  if (!sc.positive(m[x])) throw Error(ErrorCode::ZeroMarginal, "ω₁(" + fp.a.label(x) + ") = 0");
  Weight c(fp.b.size());
  for (Oid y = 0; y < fp.b.size(); ++y) c[y] = omega[fp.pair(x, y)] / m[x];
  return c;
}

/// ω_{2,E}(y) = Σ_{x∈E} ω(x,y); depends on the initial test E.
inline Weight retrodictive_marginal(const FpSpace& fp, const Weight& omega, std::size_t test) {
  Weight r(fp.b.size(), 0);
  for (Oid x : fp.a.test(test))
    for (Oid y = 0; y < fp.b.size(); ++y) r[y] += omega[fp.pair(x, y)];
  return r;
}

// ===========================================================================
// Truncated compounding

using Word = std::vector<Oid>;

/**
 * @brief ℳ(Aⁿ): tests of the compounding made of strings of length ≤ n.
 *
 * T(0) = {{ε}} and T(k) = {{ε}} ∪ {⋃_{x∈E} x·F_x : E ∈ ℳ(A), F_x ∈ T(k−1)}.
 * Outcomes are all strings of length ≤ n, ordered by length then lexicographically.
 */
struct CompoundSpace {
  TestSpace base;
  std::size_t depth = 0;
  std::vector<Word> words;
  std::unordered_map<Word, Oid, VectorHash> index;
  TestSpace ts;

  std::optional<Oid> find(const Word& w) const {
    auto it = index.find(w);
    if (it == index.end()) return std::nullopt;
    return it->second;
  }
  Oid id_of(const Word& w) const {
    auto id = find(w);
    if (!id) throw Error(ErrorCode::NotAnEvent, "string outside the depth window");
    return *id;
  }
  Oid epsilon() const { return 0; }
};

inline std::string word_label(const TestSpace& base, const Word& w) {
  if (w.empty()) return "ε";
  bool short_labels = std::all_of(base.labels().begin(), base.labels().end(),
                                  [](const std::string& l) { return l.size() == 1; });
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i && !short_labels) out += ".";
    out += base.label(w[i]);
  }
  return out;
}

namespace detail {

using WordSet = std::vector<Word>;

inline std::vector<WordSet> compound_tests(const TestSpace& base, std::size_t depth, std::size_t cap) {
  std::vector<WordSet> level{WordSet{Word{}}};
  for (std::size_t k = 1; k <= depth; ++k) {
    double total = 1;
    for (const auto& e : base.tests()) total += power_count(level.size(), e.size());
    if (total > static_cast<double>(cap))
      throw Error(ErrorCode::EnumerationCapExceeded, "compound tests at depth " + std::to_string(k));
    std::vector<WordSet> next{WordSet{Word{}}};
    for (const auto& e : base.tests()) {
      for_each_tuple(e.size(), level.size(), [&](const std::vector<std::size_t>& choice) {
        WordSet t;
        for (std::size_t i = 0; i < e.size(); ++i)
          for (const auto& suffix : level[choice[i]]) {
            Word w{e[i]};
            w.insert(w.end(), suffix.begin(), suffix.end());
            t.push_back(std::move(w));
          }
        std::sort(t.begin(), t.end());
        next.push_back(std::move(t));
      });
    }
    level = std::move(next);
  }
  return level;
}

/// |T(k)| for k = 0..depth.
inline std::vector<double> compound_test_counts(const TestSpace& base, std::size_t depth) {
  std::vector<double> c{1};
  for (std::size_t k = 1; k <= depth; ++k) {
    double v = 1;
    for (const auto& e : base.tests()) v += power_count(c.back(), e.size());
    c.push_back(v);
  }
  return c;
}

/// A random element of T(depth): uniform, or with {ε} taking half the mass at each level.
template <class Rng>
WordSet random_compound_test(const TestSpace& base, std::size_t depth, const std::vector<double>& counts,
                             Rng& rng, bool favour_short = false) {
  if (depth == 0) return WordSet{Word{}};
  std::vector<double> w{1};
  for (const auto& e : base.tests()) w.push_back(power_count(counts[depth - 1], e.size()));
  if (favour_short) w[0] = std::accumulate(w.begin() + 1, w.end(), 0.0);
  std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
  std::size_t choice = pick(rng);
  if (choice == 0) return WordSet{Word{}};
  WordSet out;
  for (Oid x : base.test(choice - 1))
    for (const auto& suffix : random_compound_test(base, depth - 1, counts, rng, favour_short)) {
      Word v{x};
      v.insert(v.end(), suffix.begin(), suffix.end());
      out.push_back(std::move(v));
    }
  return out;
}

}  // namespace detail

inline CompoundSpace compound_space(const TestSpace& base, std::size_t depth,
                                    std::size_t cap = default_cap()) {
  CompoundSpace c;
  c.base = base;
  c.depth = depth;
  // All strings of length ≤ depth, by length then lexicographically.
  std::vector<Word> layer{Word{}};
  c.words.push_back(Word{});
  for (std::size_t k = 1; k <= depth; ++k) {
    std::vector<Word> next;
    for (const auto& w : layer)
      for (Oid x = 0; x < base.size(); ++x) {
        Word v = w;
        v.push_back(x);
        next.push_back(std::move(v));
      }
    check_cap(c.words.size() + next.size(), cap, "compound outcomes");
    c.words.insert(c.words.end(), next.begin(), next.end());
    layer = std::move(next);
  }
  std::vector<std::string> labels;
  for (Oid i = 0; i < c.words.size(); ++i) {
    c.index.emplace(c.words[i], i);
    labels.push_back(word_label(base, c.words[i]));
  }
  std::vector<OutcomeSet> tests;
  for (const auto& t : detail::compound_tests(base, depth, cap)) {
    OutcomeSet ids;
    for (const auto& w : t) ids.push_back(c.index.at(w));
    tests.push_back(normalized(std::move(ids)));
  }
  c.ts = TestSpace(std::move(labels), std::move(tests));
  return c;
}

/// Membership of a set of strings in ℳ(Aⁿ) without materializing it.
inline bool compound_is_test(const TestSpace& base, std::vector<Word> s, std::size_t depth) {
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  if (s.empty()) return false;
  if (s.front().empty()) return s.size() == 1;
  if (depth == 0) return false;
  std::map<Oid, std::vector<Word>> groups;
  for (const auto& w : s) groups[w.front()].emplace_back(w.begin() + 1, w.end());
  OutcomeSet head;
  for (const auto& [x, g] : groups) head.push_back(x);
  if (!base.is_test(head)) return false;
  for (auto& [x, g] : groups)
    if (!compound_is_test(base, std::move(g), depth - 1)) return false;
  return true;
}

/// Membership of a set of strings in ℰ(Aⁿ).
inline bool compound_is_event(const TestSpace& base, std::vector<Word> s, std::size_t depth) {
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  if (s.empty()) return true;
  if (s.front().empty()) return s.size() == 1;
  if (depth == 0) return false;
  std::map<Oid, std::vector<Word>> groups;
  for (const auto& w : s) groups[w.front()].emplace_back(w.begin() + 1, w.end());
  OutcomeSet head;
  for (const auto& [x, g] : groups) head.push_back(x);
  if (!base.is_event(head)) return false;
  for (auto& [x, g] : groups)
    if (!compound_is_event(base, std::move(g), depth - 1)) return false;
  return true;
}

/// Transition function: a weight on X(A) for each string; unlisted strings use `fallback`.
struct TransitionFunction {
  std::map<Word, Weight> rows;
  Weight fallback;

  const Weight& row(const Word& w) const {
    auto it = rows.find(w);
    return it == rows.end() ? fallback : it->second;
  }
};

/// ω_f(ε) = 1, ω_f(𝔞x) = ω_f(𝔞)·f(𝔞,x).
inline Weight compound_weight(const CompoundSpace& c, const TransitionFunction& f) {
  Weight w(c.words.size());
  for (Oid i = 0; i < c.words.size(); ++i) {
    const Word& s = c.words[i];
    if (s.empty()) {
      w[i] = 1;
      continue;
    }
    Word prefix(s.begin(), s.end() - 1);
    w[i] = w[c.index.at(prefix)] * f.row(prefix).at(s.back());
  }
  return w;
}

/// Every row of f must be a state of the base model.
inline bool validate_transition(const Model& base, const TransitionFunction& f) {
  if (!contains_state(base, f.fallback)) return false;
  for (const auto& [w, r] : f.rows)
    if (!contains_state(base, r)) return false;
  return true;
}

struct TruncatedCompound {
  CompoundSpace space;
  Model model;
};

/**
 * @brief Aⁿ as a model. A full base gives a full Aⁿ; otherwise Ω(Aⁿ) is generated by
 * ω_f over transition functions whose rows are generators.
 */
inline TruncatedCompound truncated_compound(const Model& m, std::size_t depth,
                                            std::size_t cap = default_cap(),
                                            std::size_t generator_cap = 4096) {
  CompoundSpace c = compound_space(m.ts(), depth, cap);
  if (m.omega().is_full()) {
    TestSpace ts = c.ts;
    return TruncatedCompound{std::move(c), Model::trusted(std::move(ts), StateSpace::full(), m.scalar())};
  }
  const auto& g = m.omega().generators;
  std::vector<Word> inner;
  for (const auto& w : c.words)
    if (w.size() < depth) inner.push_back(w);
  if (detail::power_count(g.size(), inner.size()) > static_cast<double>(generator_cap))
    throw Error(ErrorCode::EnumerationCapExceeded, "too many transition-function generators");
  std::vector<Weight> gens;
  detail::for_each_tuple(inner.size(), g.size(), [&](const std::vector<std::size_t>& choice) {
    TransitionFunction f;
    f.fallback = g.front();
    for (std::size_t i = 0; i < inner.size(); ++i) f.rows[inner[i]] = g[choice[i]];
    gens.push_back(compound_weight(c, f));
  });
  std::sort(gens.begin(), gens.end());
  gens.erase(std::unique(gens.begin(), gens.end()), gens.end());
  TestSpace ts = c.ts;
  return TruncatedCompound{std::move(c), Model::trusted(std::move(ts), StateSpace::of(std::move(gens)), m.scalar())};
}

/// ℳ(small) = {E ∈ ℳ(big) : E ⊆ X(small)} and ⊥ agrees on X(small).
inline bool is_submodel(const CompoundSpace& small, const CompoundSpace& big) {
  auto lift = [&](Oid i) { return big.id_of(small.words[i]); };
  std::set<OutcomeSet> expected;
  for (const auto& t : big.ts.tests()) {
    bool inside = std::all_of(t.begin(), t.end(), [&](Oid o) { return big.words[o].size() <= small.depth; });
    if (inside) expected.insert(t);
  }
  std::set<OutcomeSet> got;
  for (const auto& t : small.ts.tests()) {
    OutcomeSet l;
    for (Oid o : t) l.push_back(lift(o));
    got.insert(normalized(std::move(l)));
  }
  if (got != expected) return false;
  for (Oid p = 0; p < small.words.size(); ++p)
    for (Oid q = 0; q < small.words.size(); ++q)
      if (small.ts.orthogonal(p, q) != big.ts.orthogonal(lift(p), lift(q))) return false;
  return true;
}

/// A¹ ≅ A′ via ε ↦ e.
inline bool lemma_c0_unit(const TestSpace& base) {
  CompoundSpace c1 = compound_space(base, 1);
  TestSpace prime = adjoin_unit_test(base, "ε'");
  std::vector<Oid> map(c1.words.size());
  for (Oid i = 0; i < map.size(); ++i)
    map[i] = c1.words[i].empty() ? static_cast<Oid>(base.size()) : c1.words[i].front();
  std::set<OutcomeSet> a, b(prime.tests().begin(), prime.tests().end());
  for (const auto& t : c1.ts.tests()) a.insert(image(map, t));
  return a == b;
}

/// Tests of A′⃗Aⁿ, sent by (e,𝔟) ↦ 𝔟 and (x,𝔟) ↦ x𝔟, are exactly ℳ(Aⁿ⁺¹).
inline bool lemma_c0_step(const TestSpace& base, std::size_t n, std::size_t cap = default_cap()) {
  CompoundSpace cn = compound_space(base, n, cap);
  CompoundSpace cn1 = compound_space(base, n + 1, cap);
  TestSpace prime = adjoin_unit_test(base, "ε'");
  FpSpace fp = forward_product_space(prime, cn.ts, cap);
  const Oid e = static_cast<Oid>(base.size());
  std::set<OutcomeSet> images;
  for (const auto& t : fp.ts.tests()) {
    OutcomeSet img;
    for (Oid o : t) {
      Oid x = fp.first(o);
      Word w = cn.words[fp.second(o)];
      if (x != e) w.insert(w.begin(), x);
      img.push_back(cn1.id_of(w));
    }
    img = normalized(std::move(img));
    if (img.size() != t.size()) return false;
    images.insert(std::move(img));
  }
  std::set<OutcomeSet> expected(cn1.ts.tests().begin(), cn1.ts.tests().end());
  return images == expected;
}

/// φ^c on strings of length ≤ n is test-preserving for a test-preserving φ: A → A.
inline bool lemma_c5_check(const Morphism& phi, std::size_t n, std::size_t cap = default_cap()) {
  if (!phi.test_preserving) throw Error(ErrorCode::HypothesisUnmet, "φ is not test-preserving");
  CompoundSpace c = compound_space(phi.source->ts(), n, cap);
  for (const auto& t : c.ts.tests()) {
    std::vector<Word> img;
    for (Oid o : t) {
      Word w;
      for (Oid x : c.words[o]) w.push_back(phi.map[x]);
      img.push_back(std::move(w));
    }
    std::size_t before = img.size();
    std::sort(img.begin(), img.end());
    img.erase(std::unique(img.begin(), img.end()), img.end());
    if (img.size() != before || !compound_is_test(phi.target->ts(), img, n)) return false;
  }
  return true;
}

/// Flattening and unit laws of the free monoid, on nested strings of total length ≤ n.
inline std::vector<LawReport> check_compound_monad_laws(std::size_t alphabet, std::size_t n) {
  using W = Word;
  using WW = std::vector<W>;
  auto flatten = [](const WW& ww) {
    W out;
    for (const auto& w : ww) out.insert(out.end(), w.begin(), w.end());
    return out;
  };
  std::vector<W> words{W{}};
  for (std::size_t k = 1, start = 0; k <= n; ++k) {
    std::size_t end = words.size();
    for (std::size_t i = start; i < end; ++i)
      for (Oid x = 0; x < alphabet; ++x) {
        W v = words[i];
        v.push_back(x);
        words.push_back(std::move(v));
      }
    start = end;
  }
  // Strings of strings with bounded total length and bounded count of empty pieces.
  std::vector<WW> nested{WW{}};
  std::function<void(WW&, std::size_t, std::size_t)> grow = [&](WW& cur, std::size_t len, std::size_t pieces) {
    if (pieces == n + 1) return;
    for (const auto& w : words) {
      if (len + w.size() > n) continue;
      cur.push_back(w);
      nested.push_back(cur);
      grow(cur, len + w.size(), pieces + 1);
      cur.pop_back();
    }
  };
  WW cur;
  grow(cur, 0, 0);

  LawReport unit_l{"flatten . eta_{X*} = id", true, 0, {}};
  LawReport unit_r{"flatten . (eta)* = id", true, 0, {}};
  for (const auto& w : words) {
    ++unit_l.points;
    ++unit_r.points;
    if (flatten(WW{w}) != w) unit_l.holds = false;
    WW singles;
    for (Oid x : w) singles.push_back(W{x});
    if (flatten(singles) != w) unit_r.holds = false;
  }
  LawReport assoc{"flatten . flatten = flatten . (flatten)*", true, 0, {}};
  // Triple nesting: split each nested string into consecutive groups.
  for (const auto& ww : nested) {
    std::size_t k = ww.size();
    for (std::uint64_t cuts = 0; cuts < (std::uint64_t{1} << (k > 0 ? k - 1 : 0)); ++cuts) {
      std::vector<WW> www(1);
      for (std::size_t i = 0; i < k; ++i) {
        if (i > 0 && ((cuts >> (i - 1)) & 1U)) www.emplace_back();
        www.back().push_back(ww[i]);
      }
      ++assoc.points;
      WW outer;
      for (const auto& g : www) outer.push_back(flatten(g));
      WW inner;
      for (const auto& g : www) inner.insert(inner.end(), g.begin(), g.end());
      if (flatten(outer) != flatten(inner)) assoc.holds = false;
    }
  }
  return {unit_l, unit_r, assoc};
}

// ---------------------------------------------------------------------------
// Non-atomicity

struct PerspectivityWitness {
  Oid outcome = 0;
  Event extended;  // 𝔵E
  Event axis;
};

/**
 * @brief For each string 𝔵 of length ≤ n−1, an axis certifying {𝔵} ∼ 𝔵E with |E| ≥ 2.
 * @throws HypothesisUnmet when every base test is a singleton.
 */
inline std::vector<PerspectivityWitness> prop4_nonatomicity(const CompoundSpace& c) {
  const OutcomeSet* wide = nullptr;
  for (const auto& t : c.base.tests())
    if (t.size() >= 2) {
      wide = &t;
      break;
    }
  if (!wide) throw Error(ErrorCode::HypothesisUnmet, "every test of the base is a singleton");
  std::vector<PerspectivityWitness> out;
  for (Oid i = 0; i < c.words.size(); ++i) {
    if (c.words[i].size() + 1 > c.depth) continue;
    Event ext;
    for (Oid x : *wide) {
      Word w = c.words[i];
      w.push_back(x);
      ext.push_back(c.id_of(w));
    }
    ext = normalized(std::move(ext));
    auto axis = perspective(c.ts, Event{i}, ext);
    if (!axis) throw Error(ErrorCode::LawViolation, "no axis for " + c.ts.label(i));
    out.push_back({i, std::move(ext), std::move(*axis)});
  }
  return out;
}

// ===========================================================================
// Sequential products

/**
 * @brief A binary operation on outcomes, possibly partial.
 *
 * Absorbing: an undefined product is a zero that drops out of unions (e.g. empty
 * intersections). OutsideWindow: the product lies beyond a truncation and any
 * instance touching it is skipped.
 */
struct SequentialProduct {
  enum class Nulls { Absorbing, OutsideWindow };
  std::vector<std::vector<std::optional<Oid>>> table;
  Oid unit = 0;
  Nulls nulls = Nulls::Absorbing;

  std::optional<Oid> operator()(std::optional<Oid> x, std::optional<Oid> y) const {
    if (!x || !y) return std::nullopt;
    return table.at(*x).at(*y);
  }
};

struct SequentialOptions {
  std::size_t probe_depth = 2;
  std::size_t exhaustive_max_test = 6;
  std::size_t exhaustive_max_tests = 8;
  std::size_t samples = 2000;
  std::size_t exhaustive_eval = 20000;
  std::uint64_t seed = 0x5eed;
  std::size_t state_cap = 64;
  std::size_t cap = default_cap();
};

struct SequentialReport {
  std::vector<LawReport> laws;
  bool partially_verified = false;
  bool ok() const { return all_hold(laws); }
};

namespace detail {

/// States used to probe state-level laws: generators, or polytope vertices / samples.
inline std::vector<Weight> probe_states(const Model& m, std::size_t cap, std::uint64_t seed) {
  if (!m.omega().is_full()) return m.omega().generators;
  auto v = enumerate_vertices(m.ts(), cap);
  if (v.complete) return v.vertices;
  return sample_states(m, cap, seed);
}

/// Σ_{y∈F} ω(xy), or nullopt when a product leaves the window.
inline std::optional<Rational> pulled_marginal(const SequentialProduct& pi, const Weight& w, Oid x,
                                               const OutcomeSet& f) {
  Rational s = 0;
  for (Oid y : f) {
    auto p = pi(x, y);
    if (!p) {
      if (pi.nulls == SequentialProduct::Nulls::OutsideWindow) return std::nullopt;
      continue;
    }
    s += w[*p];
  }
  return s;
}

}  // namespace detail

/**
 * @brief Checks the sequential-model laws for π on m.
 *
 * Associativity and unit on X³, orthogonality compatibility, inductivity of ℳ,
 * pullback of states to A⃗A, {e} ∈ ℳ, and the string-evaluation map on strings of
 * length ≤ probe_depth being test-preserving with φ∘η = id.
 */
inline SequentialReport check_sequential(const Model& m, const SequentialProduct& pi,
                                         const SequentialOptions& opt = {}) {
  const TestSpace& ts = m.ts();
  const std::size_t n = ts.size();
  const bool window = pi.nulls == SequentialProduct::Nulls::OutsideWindow;
  SequentialReport rep;
  if (pi.table.size() != n) throw Error(ErrorCode::DomainMismatch, "product table has wrong size");

  LawReport assoc{"associativity", true, 0, {}};
  for (Oid x = 0; x < n && assoc.holds; ++x)
    for (Oid y = 0; y < n && assoc.holds; ++y)
      for (Oid z = 0; z < n && assoc.holds; ++z) {
        auto l = pi(pi(x, y), z), r = pi(x, pi(y, z));
        if (window && (!pi(x, y) || !pi(y, z) || !l || !r)) continue;
        ++assoc.points;
        if (l != r) {
          assoc.holds = false;
          assoc.witness = ts.label(x) + "," + ts.label(y) + "," + ts.label(z);
        }
      }
  rep.laws.push_back(assoc);

  LawReport unit{"unit", true, 0, {}};
  for (Oid x = 0; x < n; ++x) {
    ++unit.points;
    if (pi(pi.unit, x) != std::optional<Oid>(x) || pi(x, pi.unit) != std::optional<Oid>(x)) {
      unit.holds = false;
      unit.witness = ts.label(x);
      break;
    }
  }
  rep.laws.push_back(unit);

  LawReport eq4{"x⊥y ⇒ zx⊥zy and xz⊥yw", true, 0, {}};
  for (Oid x = 0; x < n && eq4.holds; ++x)
    for (Oid y = 0; y < n && eq4.holds; ++y) {
      if (!ts.orthogonal(x, y)) continue;
      for (Oid z = 0; z < n && eq4.holds; ++z) {
        auto zx = pi(z, x), zy = pi(z, y);
        if (zx && zy) {
          ++eq4.points;
          if (!ts.orthogonal(*zx, *zy)) {
            eq4.holds = false;
            eq4.witness = "z=" + ts.label(z) + " x=" + ts.label(x) + " y=" + ts.label(y);
          }
        }
        for (Oid w = 0; w < n && eq4.holds; ++w) {
          auto xz = pi(x, z), yw = pi(y, w);
          if (!xz || !yw) continue;
          ++eq4.points;
          if (!ts.orthogonal(*xz, *yw)) {
            eq4.holds = false;
            eq4.witness = "x=" + ts.label(x) + " z=" + ts.label(z) + " y=" + ts.label(y) + " w=" + ts.label(w);
          }
        }
      }
    }
  rep.laws.push_back(eq4);

  // Inductivity: ⋃ x·F_x ∈ ℳ for every test E and assignment F.
  LawReport induct{"inductive", true, 0, {}};
  const std::size_t mt = ts.test_count();
  std::mt19937_64 rng(opt.seed);
  for (std::size_t e = 0; e < mt && induct.holds; ++e) {
    const OutcomeSet& E = ts.test(e);
    auto check = [&](const std::vector<std::size_t>& choice) {
      if (!induct.holds) return;
      OutcomeSet u;
      for (std::size_t i = 0; i < E.size(); ++i)
        for (Oid y : ts.test(choice[i])) {
          auto p = pi(E[i], y);
          if (!p) {
            if (window) return;
            continue;
          }
          u.push_back(*p);
        }
      ++induct.points;
      std::size_t before = u.size();
      u = normalized(std::move(u));
      if (u.size() != before || !ts.is_test(u)) {
        induct.holds = false;
        induct.witness = "E=" + ts.format(E);
      }
    };
    if (E.size() <= opt.exhaustive_max_test && mt <= opt.exhaustive_max_tests) {
      detail::for_each_tuple(E.size(), mt, check);
    } else {
      rep.partially_verified = true;
      std::uniform_int_distribution<std::size_t> pick(0, mt - 1);
      for (std::size_t s = 0; s < opt.samples && induct.holds; ++s) {
        std::vector<std::size_t> choice(E.size());
        for (auto& c : choice) c = pick(rng);
        check(choice);
      }
    }
  }
  rep.laws.push_back(induct);

  // π*(ω) ∈ Ω(A⃗A): marginal independent of F, equal to ω, and conditionals are states.
  LawReport pull{"pullback of states", true, 0, {}};
  for (const auto& w : detail::probe_states(m, opt.state_cap, opt.seed)) {
    for (Oid x = 0; x < n && pull.holds; ++x) {
      std::optional<Rational> marg;
      bool skip = false;
      for (const auto& f : ts.tests()) {
        auto v = detail::pulled_marginal(pi, w, x, f);
        if (!v) {
          skip = true;
          break;
        }
        if (marg && !m.scalar().eq(*marg, *v)) {
          pull.holds = false;
          pull.witness = "ω₁ depends on F at " + ts.label(x);
          break;
        }
        marg = v;
      }
      if (skip || !pull.holds || !m.scalar().positive(*marg)) continue;
      ++pull.points;
      Weight cond(n, 0);
      for (Oid y = 0; y < n; ++y)
        if (auto p = pi(x, y)) cond[y] = w[*p] / *marg;
      if (!contains_state(m, cond)) {
        pull.holds = false;
        pull.witness = "conditional at " + ts.label(x) + " is not a state";
      }
    }
  }
  rep.laws.push_back(pull);

  LawReport unit_test{"{e} is a test", ts.is_test(OutcomeSet{pi.unit}), 1, {}};
  rep.laws.push_back(unit_test);

  // String evaluation φ: strings of length ≤ k → X.
  LawReport eval{"string evaluation is test-preserving", true, 0, {}};
  auto evaluate = [&](const Word& w) {
    std::optional<Oid> acc = pi.unit;
    for (Oid x : w) acc = pi(acc, x);
    return acc;
  };
  for (Oid x = 0; x < n; ++x)
    if (evaluate(Word{x}) != std::optional<Oid>(x)) {
      eval.holds = false;
      eval.witness = "φ∘η ≠ id at " + ts.label(x);
    }
  auto check_eval = [&](const std::vector<Word>& t) {
    if (!eval.holds) return;
    OutcomeSet img;
    for (const auto& w : t) {
      auto v = evaluate(w);
      if (!v) {
        if (window) return;
        continue;
      }
      img.push_back(*v);
    }
    ++eval.points;
    std::size_t before = img.size();
    img = normalized(std::move(img));
    if (img.size() != before || !ts.is_test(img)) {
      eval.holds = false;
      eval.witness = "image of a depth-" + std::to_string(opt.probe_depth) + " test is " + ts.format(img);
    }
  };
  auto counts = detail::compound_test_counts(ts, opt.probe_depth);
  if (counts.back() <= static_cast<double>(opt.exhaustive_eval)) {
    for (const auto& t : detail::compound_tests(ts, opt.probe_depth, opt.cap)) check_eval(t);
  } else {
    rep.partially_verified = true;
    for (std::size_t s = 0; s < opt.samples && eval.holds; ++s)
      check_eval(detail::random_compound_test(ts, opt.probe_depth, counts, rng, window));
  }
  rep.laws.push_back(eval);
  return rep;
}

/// Throws NotSequential naming the first failing law.
inline SequentialReport validate_sequential(const Model& m, const SequentialProduct& pi,
                                            const SequentialOptions& opt = {}) {
  auto rep = check_sequential(m, pi, opt);
  for (const auto& l : rep.laws)
    if (!l.holds) throw Error(ErrorCode::NotSequential, l.law + (l.witness.empty() ? "" : " at " + l.witness));
  return rep;
}

/// Truncated concatenation on the strings of Aⁿ.
inline SequentialProduct concatenation_product(const CompoundSpace& c) {
  SequentialProduct pi;
  pi.unit = c.epsilon();
  pi.nulls = SequentialProduct::Nulls::OutsideWindow;
  pi.table.assign(c.words.size(), std::vector<std::optional<Oid>>(c.words.size()));
  for (Oid i = 0; i < c.words.size(); ++i)
    for (Oid j = 0; j < c.words.size(); ++j) {
      Word w = c.words[i];
      w.insert(w.end(), c.words[j].begin(), c.words[j].end());
      pi.table[i][j] = c.find(w);
    }
  return pi;
}

/**
 * @brief ω₁ = ω, i.e. Σ_{y∈F} ω(xy) = ω(x) for every x and test F.
 * @return the first failing outcome, if any.
 */
inline std::optional<Oid> corollary2_witness(const Model& m, const SequentialProduct& pi, const Weight& w) {
  const TestSpace& ts = m.ts();
  for (Oid x = 0; x < ts.size(); ++x)
    for (const auto& f : ts.tests()) {
      auto v = detail::pulled_marginal(pi, w, x, f);
      if (v && !m.scalar().eq(*v, w[x])) return x;
    }
  return std::nullopt;
}

inline bool corollary2_check(const Model& m, const SequentialProduct& pi, const Weight& w) {
  return !corollary2_witness(m, pi, w).has_value();
}

// ===========================================================================
// Preservation

struct PreservationRow {
  std::string property;
  bool input = false;
  bool output = false;
  bool ok() const { return !input || output; }
};

struct PreservationReport {
  std::string construction;
  std::vector<PreservationRow> rows;
  bool ok() const {
    return std::all_of(rows.begin(), rows.end(), [](const PreservationRow& r) { return r.ok(); });
  }
};

namespace detail {

struct PropertyValues {
  bool unital, strongly_unital, regular, algebraic, coherent;
};

inline PropertyValues evaluate_properties(const Model& m, std::size_t cap) {
  return {check_unital(m).holds, check_strongly_unital(m, cap).holds, is_regular(m.ts()),
          is_algebraic(m.ts()), is_coherent(m.ts())};
}

inline PreservationReport assemble(std::string name, const PropertyValues& in, const PropertyValues& out) {
  return {std::move(name),
          {{"unital", in.unital, out.unital},
           {"strongly unital", in.strongly_unital, out.strongly_unital},
           {"regular", in.regular, out.regular},
           {"algebraic", in.algebraic, out.algebraic},
           {"coherent", in.coherent, out.coherent}}};
}

inline PropertyValues both(const PropertyValues& a, const PropertyValues& b) {
  return {a.unital && b.unital, a.strongly_unital && b.strongly_unital, a.regular && b.regular,
          a.algebraic && b.algebraic, a.coherent && b.coherent};
}

}  // namespace detail

/// Properties of A and B against those of A⃗B. Coherence here is for finite spaces.
inline PreservationReport preservation_forward(const Model& a, const Model& b, std::size_t cap = default_cap()) {
  auto fp = forward_product(a, b, cap);
  auto in = detail::both(detail::evaluate_properties(a, cap), detail::evaluate_properties(b, cap));
  return detail::assemble("forward product", in, detail::evaluate_properties(fp.model, cap));
}

/// Properties of A against those of Aⁿ.
inline PreservationReport preservation_compound(const Model& a, std::size_t depth,
                                                std::size_t cap = default_cap()) {
  auto c = truncated_compound(a, depth, cap);
  return detail::assemble("compound depth " + std::to_string(depth), detail::evaluate_properties(a, cap),
                          detail::evaluate_properties(c.model, cap));
}

}  // namespace orthokit
