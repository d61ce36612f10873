#pragma once

#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "orthokit/logic.hpp"
#include "orthokit/morphism.hpp"

namespace orthokit {

/// All set partitions of `s`, blocks in order of first element (restricted-growth strings).
inline std::vector<std::vector<OutcomeSet>> set_partitions(const OutcomeSet& s,
                                                           std::size_t cap = default_cap()) {
  std::vector<std::vector<OutcomeSet>> out;
  const std::size_t n = s.size();
  if (n == 0) return out;
  std::vector<std::size_t> rgs(n, 0);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t blocks) {
    if (i == n) {
      std::vector<OutcomeSet> p(blocks);
      for (std::size_t k = 0; k < n; ++k) p[rgs[k]].push_back(s[k]);
      out.push_back(std::move(p));
      check_cap(out.size(), cap, "set partitions");
      return;
    }
    for (std::size_t b = 0; b <= blocks; ++b) {
      rgs[i] = b;
      rec(i + 1, std::max(blocks, b + 1));
    }
  };
  rec(0, 0);
  return out;
}

/**
 * @brief ℳ^#: outcomes are the nonempty events of the base, tests are partitions of tests.
 *
 * Outcome ids follow the lexicographic order of the underlying events; labels are
 * the formatted events.
 */
struct SharpSpace {
  TestSpace base;
  TestSpace ts;
  std::vector<Event> underlying;
  std::unordered_map<Bits, Oid, BitsHash> index;

  std::optional<Oid> find(const Event& a) const {
    if (!base.is_event(a) || a.empty()) return std::nullopt;
    auto it = index.find(base.bits(a));
    if (it == index.end()) return std::nullopt;
    return it->second;
  }
  Oid id_of(const Event& a) const {
    auto id = find(a);
    if (!id) throw Error(ErrorCode::NotAnEvent, base.format(a) + " is not a nonempty event");
    return *id;
  }
  Oid singleton(Oid x) const { return id_of(Event{x}); }
};

inline SharpSpace sharp_space(const TestSpace& base, std::size_t cap = default_cap()) {
  SharpSpace s{base, TestSpace(), {}, {}};
  std::vector<std::string> labels;
  for (auto& a : events(base, cap)) {
    if (a.empty()) continue;
    s.index.emplace(base.bits(a), static_cast<Oid>(s.underlying.size()));
    labels.push_back(base.format(a));
    s.underlying.push_back(std::move(a));
  }
  std::vector<OutcomeSet> tests;
  for (const auto& t : base.tests()) {
    for (const auto& p : set_partitions(t, cap)) {
      OutcomeSet test;
      for (const auto& block : p) test.push_back(s.index.at(base.bits(block)));
      tests.push_back(normalized(std::move(test)));
      check_cap(tests.size(), cap, "coarsened tests");
    }
  }
  s.ts = TestSpace(std::move(labels), std::move(tests));
  return s;
}

/// A^# as a model, with the outcome bookkeeping of its test space.
struct CoarseModel {
  SharpSpace space;
  Model model;
};

/// Lifts α to α^#(a) = Σ_{x∈a} α(x).
inline Weight lift_weight(const SharpSpace& s, const Weight& w) {
  Weight out;
  out.reserve(s.underlying.size());
  for (const auto& a : s.underlying) out.push_back(weight_of_event(w, a));
  return out;
}

/// A ↦ A^#. Full state spaces stay full; generators are lifted pointwise.
inline CoarseModel coarsen(const Model& m, std::size_t cap = default_cap()) {
  SharpSpace s = sharp_space(m.ts(), cap);
  StateSpace omega = StateSpace::full();
  if (!m.omega().is_full()) {
    std::vector<Weight> gens;
    for (const auto& g : m.omega().generators) gens.push_back(lift_weight(s, g));
    omega = StateSpace::of(std::move(gens));
  }
  TestSpace ts = s.ts;
  // Every nonempty event contains an outcome that some state charges.
  return CoarseModel{std::move(s), Model::trusted(std::move(ts), std::move(omega), m.scalar())};
}

namespace detail {

inline void require_same_space(const TestSpace& a, const TestSpace& b, const char* what) {
  if (a.labels() != b.labels() || a.tests() != b.tests())
    throw Error(ErrorCode::DomainMismatch, what);
}

/// Outcome map of μ: A## → A#.
inline std::vector<Oid> mu_map(const SharpSpace& s1, const SharpSpace& s2) {
  std::vector<Oid> map(s2.underlying.size());
  for (Oid b = 0; b < map.size(); ++b) {
    Bits u(s1.base.size());
    for (Oid a : s2.underlying[b]) u |= s1.base.bits(s1.underlying[a]);
    map[b] = s1.index.at(u);
  }
  return map;
}

}  // namespace detail

/// η_A(x) = {x}.
inline Morphism unit_eta(const Model& a, const CoarseModel& sharp) {
  detail::require_same_space(a.ts(), sharp.space.base, "η: coarsening of a different model");
  std::vector<Oid> map(a.ts().size());
  for (Oid x = 0; x < map.size(); ++x) map[x] = sharp.space.singleton(x);
  return validate_morphism(a, sharp.model, std::move(map));
}

/// μ_A(a) = ⋃a, from A## to A#.
inline Morphism mult_mu(const CoarseModel& sharp, const CoarseModel& sharp2) {
  detail::require_same_space(sharp.model.ts(), sharp2.space.base, "μ: A## is not built over A#");
  return validate_morphism(sharp2.model, sharp.model, detail::mu_map(sharp.space, sharp2.space));
}

/// φ^#(a) = φ(a).
inline Morphism functor_sharp(const Morphism& phi, const CoarseModel& src, const CoarseModel& dst) {
  detail::require_same_space(phi.source->ts(), src.space.base, "φ^#: source coarsening mismatch");
  detail::require_same_space(phi.target->ts(), dst.space.base, "φ^#: target coarsening mismatch");
  std::vector<Oid> map(src.space.underlying.size());
  for (Oid a = 0; a < map.size(); ++a) map[a] = dst.space.id_of(image(phi.map, src.space.underlying[a]));
  return validate_morphism(src.model, dst.model, std::move(map));
}

// ---------------------------------------------------------------------------
// Law checking

/**
 * @brief The associativity square and both unit triangles for #, pointwise.
 *
 * The square is checked on every outcome of A###, i.e. every nonempty event of A##,
 * streamed without building A### itself.
 */
inline std::vector<LawReport> check_monad_laws_sharp(const TestSpace& ts, std::size_t cap = default_cap()) {
  SharpSpace s1 = sharp_space(ts, cap);
  SharpSpace s2 = sharp_space(s1.ts, cap);
  std::vector<Oid> mu = detail::mu_map(s1, s2);

  LawReport assoc{"mu . #mu = mu . mu_{A#}", true, 0, {}};
  for (const auto& a : events(s2.ts, cap)) {
    if (a.empty()) continue;
    ++assoc.points;
    // Across the top: #μ then μ.
    OutcomeSet top;
    for (Oid b : a) top.push_back(mu[b]);
    top = normalized(std::move(top));
    auto top_id = s2.find(top);
    // Down the side: μ_{A#} then μ.
    Bits side(s1.ts.size());
    for (Oid b : a) side |= s1.ts.bits(s2.underlying[b]);
    auto side_id = s2.find(side.members());
    if (!top_id || !side_id || mu[*top_id] != mu[*side_id]) {
      assoc.holds = false;
      assoc.witness = s2.ts.format(a);
      break;
    }
  }

  LawReport left{"mu . #eta = id", true, 0, {}};
  LawReport right{"mu . eta_{A#} = id", true, 0, {}};
  for (Oid a = 0; a < s1.underlying.size(); ++a) {
    ++left.points;
    ++right.points;
    OutcomeSet singles;
    for (Oid x : s1.underlying[a]) singles.push_back(s1.singleton(x));
    auto l = s2.find(normalized(std::move(singles)));
    if (left.holds && (!l || mu[*l] != a)) {
      left.holds = false;
      left.witness = s1.ts.label(a);
    }
    auto r = s2.find(OutcomeSet{a});
    if (right.holds && (!r || mu[*r] != a)) {
      right.holds = false;
      right.witness = s1.ts.label(a);
    }
  }
  return {assoc, left, right};
}

/// η_B∘φ = φ^#∘η_A and μ_B∘φ^{##} = φ^#∘μ_A, pointwise on outcome maps.
inline std::vector<LawReport> check_sharp_naturality(const TestSpace& a, const TestSpace& b,
                                                     const std::vector<Oid>& phi,
                                                     std::size_t cap = default_cap()) {
  SharpSpace a1 = sharp_space(a, cap), a2 = sharp_space(a1.ts, cap);
  SharpSpace b1 = sharp_space(b, cap), b2 = sharp_space(b1.ts, cap);
  auto sharp_map = [&](const SharpSpace& src, const SharpSpace& dst, const std::vector<Oid>& f) {
    std::vector<Oid> m(src.underlying.size());
    for (Oid i = 0; i < m.size(); ++i) m[i] = dst.id_of(image(f, src.underlying[i]));
    return m;
  };
  auto phi1 = sharp_map(a1, b1, phi);
  auto phi2 = sharp_map(a2, b2, phi1);
  auto mu_a = detail::mu_map(a1, a2), mu_b = detail::mu_map(b1, b2);

  LawReport eta{"eta naturality", true, 0, {}};
  for (Oid x = 0; x < a.size(); ++x) {
    ++eta.points;
    if (b1.singleton(phi[x]) != phi1[a1.singleton(x)]) {
      eta.holds = false;
      eta.witness = a.label(x);
      break;
    }
  }
  LawReport mu{"mu naturality", true, 0, {}};
  for (Oid p = 0; p < a2.underlying.size(); ++p) {
    ++mu.points;
    if (mu_b[phi2[p]] != phi1[mu_a[p]]) {
      mu.holds = false;
      mu.witness = a1.ts.format(a2.underlying[p]);
      break;
    }
  }
  return {eta, mu};
}

// ---------------------------------------------------------------------------
// Coherences

/// σ indexed by the outcome ids of A^# (nonempty events of A).
struct CoherenceMap {
  std::vector<Oid> map;
};

/// A validated coherence on a model.
struct Coherence {
  const Model* model = nullptr;
  const CoarseModel* sharp = nullptr;
  CoherenceMap sigma;
  Morphism morphism;

  Oid operator()(const Event& a) const { return sigma.map.at(sharp->space.id_of(a)); }
};

/**
 * @brief Checks that σ: A^# → A is a coherence.
 *
 * Verifies the morphism conditions, σ({x}) = x, σ(⋃aᵢ) = σ{σ(aᵢ)} for every jointly
 * orthogonal family, test preservation, and (E∖a)∪{σ(a)} ∈ ℳ for a ⊆ E.
 */
inline Coherence validate_coherence(const Model& m, const CoarseModel& sharp, const CoherenceMap& sigma,
                                    std::size_t cap = default_cap()) {
  const TestSpace& ts = m.ts();
  const SharpSpace& s = sharp.space;
  detail::require_same_space(ts, s.base, "coherence: coarsening of a different model");
  auto fail = [](const std::string& what) { return Error(ErrorCode::NotCoherence, what); };
  if (sigma.map.size() != s.underlying.size()) throw fail("σ is not total on nonempty events");
  for (Oid v : sigma.map)
    if (v >= ts.size()) throw fail("σ leaves the outcome set");
  for (Oid x = 0; x < ts.size(); ++x)
    if (sigma.map[s.singleton(x)] != x) throw fail("σ({" + ts.label(x) + "}) ≠ " + ts.label(x));

  // (i) over jointly orthogonal families: nonempty events of A^#.
  for (const auto& fam : events(s.ts, cap)) {
    if (fam.size() < 2) continue;
    Bits u(ts.size());
    OutcomeSet inner;
    for (Oid a : fam) {
      u |= ts.bits(s.underlying[a]);
      inner.push_back(sigma.map[a]);
    }
    inner = normalized(std::move(inner));
    auto inner_id = inner.size() == fam.size() ? s.find(inner) : std::nullopt;
    if (!inner_id || sigma.map[*inner_id] != sigma.map[s.index.at(u)])
      throw fail("σ(⋃aᵢ) ≠ σ{σ(aᵢ)} at " + s.ts.format(fam));
  }

  Coherence c;
  c.model = &m;
  c.sharp = &sharp;
  c.sigma = sigma;
  try {
    c.morphism = validate_morphism(sharp.model, m, sigma.map);
  } catch (const Error& e) {
    throw fail(std::string("σ is not a morphism: ") + e.what());
  }
  if (!c.morphism.test_preserving) throw fail("σ is not test-preserving");
  for (const auto& t : ts.tests()) {
    Bits tb = ts.bits(t);
    for (const auto& a : events(ts, cap)) {
      if (a.empty() || !ts.bits(a).subset_of(tb)) continue;
      OutcomeSet sub = set_difference(t, a);
      sub = set_union(sub, OutcomeSet{sigma.map[s.id_of(a)]});
      if (!ts.is_test(sub) || sub.size() != t.size() - a.size() + 1)
        throw fail("(E∖a)∪{σ(a)} is not a test for E=" + ts.format(t) + ", a=" + ts.format(a));
    }
  }
  return c;
}

struct CohesionWitness {
  std::size_t test = 0;
  Event a;
};

/// First (E, a) with σ(a) ∈ E and (E∖{σ(a)})∪a ∉ ℳ.
inline std::optional<CohesionWitness> cohesion_witness(const Coherence& c) {
  const TestSpace& ts = c.model->ts();
  const SharpSpace& s = c.sharp->space;
  for (Oid ai = 0; ai < s.underlying.size(); ++ai) {
    Oid y = c.sigma.map[ai];
    for (std::size_t t : ts.tests_containing(y)) {
      OutcomeSet e = set_difference(ts.test(t), OutcomeSet{y});
      e = set_union(e, s.underlying[ai]);
      if (!ts.is_test(e)) return CohesionWitness{t, s.underlying[ai]};
    }
  }
  return std::nullopt;
}

inline bool is_cohesion(const Coherence& c) { return !cohesion_witness(c).has_value(); }

/// a ∼ b ⇒ σ(a) = σ(b) over nonempty events.
inline bool sigma_constant_on_classes(const Coherence& c) {
  const TestSpace& ts = c.model->ts();
  const SharpSpace& s = c.sharp->space;
  for (Oid ai = 0; ai < s.underlying.size(); ++ai)
    for (const auto& comp : complements(ts, s.underlying[ai]))
      for (const auto& b : complements(ts, comp))
        if (!b.empty() && c.sigma.map[s.id_of(b)] != c.sigma.map[ai]) return false;
  return true;
}

struct Lemma5Report {
  bool cohesive_projective = false;
  bool cohesive_constant = false;
  bool algebraic_projective = false;
  bool agree() const {
    return cohesive_projective == cohesive_constant && cohesive_constant == algebraic_projective;
  }
};

inline Lemma5Report lemma5_classify(const Coherence& c) {
  const TestSpace& ts = c.model->ts();
  bool coh = is_cohesion(c);
  bool proj = is_projective(ts);
  return {coh && proj, coh && sigma_constant_on_classes(c), is_algebraic(ts) && proj};
}

/**
 * @brief For a regular model with a cohesion: coherent, algebraic, and OMP logic.
 * @throws HypothesisUnmet if the model is not regular or σ is not a cohesion.
 */
inline bool prop1_check(const Coherence& c, std::size_t cap = default_cap()) {
  const TestSpace& ts = c.model->ts();
  if (!is_regular(ts)) throw Error(ErrorCode::HypothesisUnmet, "model is not regular");
  if (!is_cohesion(c)) throw Error(ErrorCode::HypothesisUnmet, "σ is not a cohesion");
  if (!is_coherent(ts) || !is_algebraic(ts)) return false;
  return build_logic(ts, cap).is_omp();
}

/**
 * @brief Enumerates coherence maps by backtracking over events in size order.
 *
 * σ(a) is pinned by any split of a into smaller jointly orthogonal blocks, and must
 * satisfy (E∖a)∪{σ(a)} ∈ ℳ for all E ⊇ a. Survivors are fully validated.
 */
inline std::vector<Coherence> find_coherences(const Model& m, const CoarseModel& sharp,
                                              std::size_t limit = 16,
                                              std::size_t cap = default_cap()) {
  const TestSpace& ts = m.ts();
  const SharpSpace& s = sharp.space;
  std::vector<Oid> order(s.underlying.size());
  std::iota(order.begin(), order.end(), Oid{0});
  std::stable_sort(order.begin(), order.end(), [&](Oid a, Oid b) {
    return s.underlying[a].size() < s.underlying[b].size();
  });
  std::vector<std::vector<Oid>> candidates(order.size());
  for (Oid a = 0; a < s.underlying.size(); ++a) {
    const Event& ev = s.underlying[a];
    if (ev.size() == 1) {
      candidates[a] = {ev.front()};
      continue;
    }
    Bits ab = ts.bits(ev);
    for (Oid y = 0; y < ts.size(); ++y) {
      bool ok = true;
      for (std::size_t t = 0; t < ts.test_count() && ok; ++t) {
        if (!ab.subset_of(ts.test_bits(t))) continue;
        OutcomeSet e = set_union(set_difference(ts.test(t), ev), OutcomeSet{y});
        ok = e.size() == ts.test(t).size() - ev.size() + 1 && ts.is_test(e);
      }
      if (ok) candidates[a].push_back(y);
    }
  }
  std::vector<std::vector<std::vector<OutcomeSet>>> splits(s.underlying.size());
  for (Oid a = 0; a < s.underlying.size(); ++a)
    if (s.underlying[a].size() >= 2)
      for (auto& p : set_partitions(s.underlying[a], cap))
        if (p.size() >= 2) splits[a].push_back(std::move(p));

  std::vector<Coherence> out;
  std::vector<Oid> sigma(s.underlying.size(), 0);
  std::function<void(std::size_t)> rec = [&](std::size_t k) {
    if (out.size() >= limit) return;
    if (k == order.size()) {
      try {
        out.push_back(validate_coherence(m, sharp, CoherenceMap{sigma}, cap));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NotCoherence) throw;
      }
      return;
    }
    Oid a = order[k];
    std::optional<Oid> forced;
    for (const auto& p : splits[a]) {
      OutcomeSet inner;
      for (const auto& block : p) inner.push_back(sigma[s.id_of(block)]);
      inner = normalized(std::move(inner));
      auto id = inner.size() == p.size() ? s.find(inner) : std::nullopt;
      if (!id) return;
      if (*id == a) continue;  // the split into singletons
      Oid v = sigma[*id];
      if (forced && *forced != v) return;
      forced = v;
    }
    for (Oid y : candidates[a]) {
      if (forced && y != *forced) continue;
      sigma[a] = y;
      rec(k + 1);
    }
  };
  rec(0);
  return out;
}

// ---------------------------------------------------------------------------
// Logic of A^#

/// [a] ↦ [{a}] from Π(A) to Π(A^#); true iff it is an isomorphism.
inline bool lemma3_isomorphism(const TestSpace& ts, std::size_t cap = default_cap()) {
  SharpSpace s = sharp_space(ts, cap);
  Logic la = build_logic(ts, cap);
  Logic ls = build_logic(s.ts, cap);
  std::vector<std::size_t> f(la.size());
  for (std::size_t p = 0; p < la.size(); ++p) {
    const Event& rep = la.representative(p);
    f[p] = rep.empty() ? ls.class_of({}) : ls.class_of({s.id_of(rep)});
  }
  return is_isomorphism(la, ls, f);
}

}  // namespace orthokit
