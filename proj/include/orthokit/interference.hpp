#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "orthokit/coarsening.hpp"
#include "orthokit/compound.hpp"
#include "orthokit/logic.hpp"

namespace orthokit {

/// A set of strings, kept sorted and duplicate-free.
using WordSet = std::vector<Word>;

inline WordSet normalized_words(WordSet s) {
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

/// a₁ × ⋯ × aₙ ⊆ X*, the setwise product of sets of strings.
inline WordSet setwise_product(const std::vector<WordSet>& factors) {
  WordSet acc{Word{}};
  for (const auto& f : factors) {
    WordSet next;
    next.reserve(acc.size() * f.size());
    for (const auto& u : acc)
      for (const auto& v : f) {
        Word w = u;
        w.insert(w.end(), v.begin(), v.end());
        next.push_back(std::move(w));
      }
    acc = std::move(next);
  }
  return normalized_words(std::move(acc));
}

/// Events of A as sets of length-one strings.
inline WordSet as_words(const Event& a) {
  WordSet s;
  for (Oid x : a) s.push_back(Word{x});
  return s;
}

/// ℓ_A(a₁,…,aₙ) = a₁ × ⋯ × aₙ for a string of events of A.
inline WordSet ell(const std::vector<Event>& string) {
  std::vector<WordSet> f;
  for (const auto& a : string) f.push_back(as_words(a));
  return setwise_product(f);
}

namespace detail {

/// All strings of length ≤ n over an alphabet of size k.
inline std::vector<Word> all_words(std::size_t k, std::size_t n, std::size_t cap) {
  std::vector<Word> out{Word{}};
  std::size_t start = 0;
  for (std::size_t len = 1; len <= n; ++len) {
    std::size_t end = out.size();
    for (std::size_t i = start; i < end; ++i)
      for (Oid x = 0; x < k; ++x) {
        Word w = out[i];
        w.push_back(x);
        out.push_back(std::move(w));
        check_cap(out.size(), cap, "strings in the window");
      }
    start = end;
  }
  return out;
}

inline std::string format_words(const TestSpace& base, const WordSet& s) {
  std::string out = "{";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += word_label(base, s[i]);
  }
  return out + "}";
}

inline void fail_at(LawReport& r, std::string witness) {
  if (!r.holds) return;
  r.holds = false;
  r.witness = std::move(witness);
}

}  // namespace detail

// ===========================================================================
// Distributive law ℓ: (A^#)^c → (A^c)^#

/**
 * @brief ℓ on the depth-n windows is injective and test-preserving.
 *
 * Every test of (A^#)ⁿ must map to a family of disjoint nonempty events whose union
 * is a test of Aⁿ. Checked exhaustively up to `exhaustive` tests, sampled beyond.
 */
inline LawReport check_ell_embedding(const TestSpace& ts, std::size_t depth, std::size_t cap = default_cap(),
                                     std::size_t exhaustive = 200000, std::size_t samples = 5000,
                                     std::uint64_t seed = 0x5eed) {
  SharpSpace s = sharp_space(ts, cap);
  LawReport r{"ℓ is an embedding", true, 0, {}};
  auto strings = detail::all_words(s.underlying.size(), depth, cap);
  std::map<WordSet, Word> seen;
  for (const auto& w : strings) {
    std::vector<Event> evs;
    for (Oid a : w) evs.push_back(s.underlying[a]);
    auto img = ell(evs);
    ++r.points;
    auto [it, fresh] = seen.emplace(img, w);
    if (!fresh) detail::fail_at(r, "two strings share the image " + detail::format_words(ts, img));
    if (!compound_is_event(ts, img, depth)) detail::fail_at(r, detail::format_words(ts, img) + " is not an event");
  }
  auto check_test = [&](const detail::WordSet& t) {
    WordSet all;
    std::size_t total = 0;
    for (const auto& w : t) {
      std::vector<Event> evs;
      for (Oid a : w) evs.push_back(s.underlying[a]);
      auto img = ell(evs);
      total += img.size();
      all.insert(all.end(), img.begin(), img.end());
    }
    all = normalized_words(std::move(all));
    ++r.points;
    if (all.size() != total) detail::fail_at(r, "images of a test overlap");
    else if (!compound_is_test(ts, all, depth))
      detail::fail_at(r, "image of a test is not a test: " + detail::format_words(ts, all));
  };
  auto counts = detail::compound_test_counts(s.ts, depth);
  if (counts.back() <= static_cast<double>(exhaustive)) {
    for (const auto& t : detail::compound_tests(s.ts, depth, cap)) check_test(t);
  } else {
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < samples && r.holds; ++i)
      check_test(detail::random_compound_test(s.ts, depth, counts, rng));
  }
  return r;
}

/// Materialized windows for ℓ as a morphism. Only for small bases.
struct EllWindows {
  CoarseModel sharp;             // A^#
  TruncatedCompound sharp_c;     // (A^#)ⁿ
  TruncatedCompound compound;    // Aⁿ
  CoarseModel compound_sharp;    // (Aⁿ)^#
};

inline EllWindows ell_windows(const Model& m, std::size_t depth, std::size_t cap = default_cap()) {
  CoarseModel sharp = coarsen(m, cap);
  TruncatedCompound sc = truncated_compound(sharp.model, depth, cap);
  TruncatedCompound c = truncated_compound(m, depth, cap);
  CoarseModel cs = coarsen(c.model, cap);
  return EllWindows{std::move(sharp), std::move(sc), std::move(c), std::move(cs)};
}

/// ℓ_A as a validated morphism (A^#)ⁿ → (Aⁿ)^#.
inline Morphism distributive_ell(const EllWindows& w) {
  const auto& src = w.sharp_c.space;
  std::vector<Oid> map(src.words.size());
  for (Oid i = 0; i < src.words.size(); ++i) {
    std::vector<Event> evs;
    for (Oid a : src.words[i]) evs.push_back(w.sharp.space.underlying[a]);
    Event ids;
    for (const auto& s : ell(evs)) ids.push_back(w.compound.space.id_of(s));
    map[i] = w.compound_sharp.space.id_of(normalized(std::move(ids)));
  }
  return validate_morphism(w.sharp_c.model, w.compound_sharp.model, std::move(map));
}

/// ℓ_B ∘ φ^{#c} = φ^{c#} ∘ ℓ_A on strings of nonempty events of length ≤ n.
inline LawReport check_ell_naturality(const TestSpace& a, const TestSpace& b, const std::vector<Oid>& phi,
                                      std::size_t depth, std::size_t cap = default_cap()) {
  check_test_space_morphism(a, b, phi);
  SharpSpace s = sharp_space(a, cap);
  LawReport r{"ℓ is natural", true, 0, {}};
  for (const auto& w : detail::all_words(s.underlying.size(), depth, cap)) {
    std::vector<Event> evs, mapped;
    for (Oid i : w) {
      evs.push_back(s.underlying[i]);
      mapped.push_back(image(phi, s.underlying[i]));
    }
    WordSet left = ell(mapped);
    WordSet right;
    for (const auto& x : ell(evs)) {
      Word y;
      for (Oid o : x) y.push_back(phi[o]);
      right.push_back(std::move(y));
    }
    right = normalized_words(std::move(right));
    ++r.points;
    if (left != right) detail::fail_at(r, detail::format_words(b, left) + " vs " + detail::format_words(b, right));
  }
  return r;
}

/**
 * @brief Pointwise commutation of the four distributive-law diagrams on the depth-n windows.
 *
 * (I)   μ^#_{A^c} ∘ #ℓ_A ∘ ℓ_{A^#} = ℓ_A ∘ (μ^#_A)^c   on strings over X(A^##)
 * (II)  #(μ^c_A) ∘ ℓ_{A^c} ∘ (ℓ_A)^c = ℓ_A ∘ μ^c_{A^#}  on strings of strings of events,
 *       outer and total length ≤ n
 * (III) ℓ_A ∘ η^c_{A^#} = #(η^c_A)                     on nonempty events
 * (IV)  ℓ_A ∘ (η^#_A)^c = η^#_{A^c}                    on strings of outcomes
 *
 * Intermediate values are also checked to be outcomes of the spaces they pass through.
 */
inline std::vector<LawReport> check_distributive_diagrams(const TestSpace& ts, std::size_t depth,
                                                          std::size_t cap = default_cap()) {
  SharpSpace s1 = sharp_space(ts, cap);
  SharpSpace s2 = sharp_space(s1.ts, cap);
  CompoundSpace cn = compound_space(ts, depth, cap);
  auto ev = [&](Oid a) -> const Event& { return s1.underlying[a]; };

  // (I)
  LawReport d1{"(I) μ^#·#ℓ·ℓ = ℓ·(μ^#)^c", true, 0, {}};
  for (const auto& w : detail::all_words(s2.underlying.size(), depth, cap)) {
    if (!d1.holds) break;
    // w = (a₁,…,aₙ), each aᵢ a set of disjoint events of A (ids in A^#).
    std::vector<WordSet> fams;
    for (Oid ai : w) fams.push_back(as_words(s2.underlying[ai]));
    WordSet top1 = setwise_product(fams);  // ℓ_{A^#}: strings over X(A^#)
    ++d1.points;
    if (!compound_is_event(s1.ts, top1, depth)) {
      detail::fail_at(d1, "ℓ_{A^#} leaves the events of (A^#)^c");
      break;
    }
    std::vector<WordSet> top2;  // #ℓ_A: a family of events of A^c
    for (const auto& str : top1) {
      std::vector<Event> evs;
      for (Oid a : str) evs.push_back(ev(a));
      top2.push_back(ell(evs));
    }
    WordSet top;  // μ^#_{A^c}
    std::size_t total = 0;
    for (const auto& e : top2) {
      if (e.empty() || !compound_is_event(ts, e, depth)) detail::fail_at(d1, "#ℓ_A gives a non-event");
      total += e.size();
      top.insert(top.end(), e.begin(), e.end());
    }
    top = normalized_words(std::move(top));
    if (top.size() != total) detail::fail_at(d1, "#ℓ_A gives overlapping events");
    if (!compound_is_event(ts, top, depth)) detail::fail_at(d1, "μ^# gives a non-event");
    std::vector<Event> unions;  // (μ^#_A)^c
    for (Oid ai : w) {
      Event u;
      for (Oid a : s2.underlying[ai]) u = set_union(u, ev(a));
      unions.push_back(std::move(u));
    }
    WordSet left = ell(unions);
    if (left != top) detail::fail_at(d1, detail::format_words(ts, top) + " vs " + detail::format_words(ts, left));
  }

  // (II)
  LawReport d2{"(II) #μ^c·ℓ_{A^c}·(ℓ)^c = ℓ·μ^c", true, 0, {}};
  {
    auto inner = detail::all_words(s1.underlying.size(), depth, cap);
    std::vector<std::vector<Word>> nested{{}};
    std::function<void(std::vector<Word>&, std::size_t)> grow = [&](std::vector<Word>& cur, std::size_t len) {
      if (cur.size() == depth) return;
      for (const auto& w : inner) {
        if (len + w.size() > depth) continue;
        cur.push_back(w);
        nested.push_back(cur);
        check_cap(nested.size(), cap, "nested strings");
        grow(cur, len + w.size());
        cur.pop_back();
      }
    };
    std::vector<Word> cur;
    grow(cur, 0);
    for (const auto& outer : nested) {
      if (!d2.holds) break;
      ++d2.points;
      std::vector<WordSet> comps;  // (ℓ_A)^c
      for (const auto& w : outer) {
        std::vector<Event> evs;
        for (Oid a : w) evs.push_back(ev(a));
        comps.push_back(ell(evs));
        if (!compound_is_event(ts, comps.back(), depth)) detail::fail_at(d2, "(ℓ_A)^c leaves the events of A^c");
      }
      // ℓ_{A^c}: strings of strings, recorded as strings over X(Aⁿ).
      std::vector<WordSet> as_ids;
      for (const auto& c : comps) {
        WordSet ids;
        for (const auto& w : c) ids.push_back(Word{cn.id_of(w)});
        as_ids.push_back(std::move(ids));
      }
      WordSet nested_set = setwise_product(as_ids);
      if (!compound_is_event(cn.ts, nested_set, depth)) detail::fail_at(d2, "ℓ_{A^c} leaves the events of A^cc");
      WordSet top;  // #(μ^c_A)
      for (const auto& ww : nested_set) {
        Word flat;
        for (Oid id : ww) flat.insert(flat.end(), cn.words[id].begin(), cn.words[id].end());
        top.push_back(std::move(flat));
      }
      std::size_t before = top.size();
      top = normalized_words(std::move(top));
      if (top.size() != before) detail::fail_at(d2, "#(μ^c) is not injective on an event");
      std::vector<Event> flat_events;  // μ^c_{A^#}
      for (const auto& w : outer)
        for (Oid a : w) flat_events.push_back(ev(a));
      WordSet left = ell(flat_events);
      if (left != top) detail::fail_at(d2, detail::format_words(ts, top) + " vs " + detail::format_words(ts, left));
    }
  }

  // (III)
  LawReport d3{"(III) ℓ·η^c = #(η^c)", true, 0, {}};
  for (const auto& a : s1.underlying) {
    if (depth == 0) break;
    ++d3.points;
    if (ell({a}) != as_words(a)) detail::fail_at(d3, ts.format(a));
  }

  // (IV)
  LawReport d4{"(IV) ℓ·(η^#)^c = η^#", true, 0, {}};
  for (const auto& w : detail::all_words(ts.size(), depth, cap)) {
    ++d4.points;
    std::vector<Event> singles;
    for (Oid x : w) singles.push_back(Event{x});
    if (ell(singles) != WordSet{w}) detail::fail_at(d4, word_label(ts, w));
  }
  return {d1, d2, d3, d4};
}

// ===========================================================================
// Sequential structure on events

/// a ∗ b = {π(x,y) : x∈a, y∈b}; nullopt when a product leaves the window or is empty.
inline std::optional<Event> event_product(const SequentialProduct& pi, const Event& a, const Event& b) {
  Event out;
  for (Oid x : a)
    for (Oid y : b) {
      auto p = pi(x, y);
      if (!p) {
        if (pi.nulls == SequentialProduct::Nulls::OutsideWindow) return std::nullopt;
        continue;
      }
      out.push_back(*p);
    }
  out = normalized(std::move(out));
  if (out.empty()) return std::nullopt;
  return out;
}

/// Elementwise multiplication of nonempty events, as a product on A^#.
inline SequentialProduct setwise_sequential(const SharpSpace& s, const SequentialProduct& pi) {
  SequentialProduct out;
  out.nulls = pi.nulls;
  out.unit = s.id_of(Event{pi.unit});
  const std::size_t n = s.underlying.size();
  out.table.assign(n, std::vector<std::optional<Oid>>(n));
  for (Oid i = 0; i < n; ++i)
    for (Oid j = 0; j < n; ++j)
      if (auto p = event_product(pi, s.underlying[i], s.underlying[j])) out.table[i][j] = s.find(*p);
  return out;
}

/**
 * @brief The monoid of events acting on the logic: b ∼ b′ ⇒ a∗b ∼ a∗b′.
 *
 * Also searches for a failure of the mirrored law (a ∼ b with a∗c ≁ b∗c), returned in
 * the witness field of the second report when found.
 */
inline std::vector<LawReport> check_monoid_action(const TestSpace& ts, const SequentialProduct& pi,
                                                  std::size_t cap = default_cap()) {
  auto evs = events(ts, cap);
  evs.erase(std::remove_if(evs.begin(), evs.end(), [](const Event& e) { return e.empty(); }), evs.end());
  // Perspectivity classes of the nonempty events.
  std::vector<std::vector<Event>> comps;
  for (const auto& e : evs) comps.push_back(complements(ts, e));
  auto persp = [&](std::size_t i, std::size_t j) {
    std::vector<Event> common;
    std::set_intersection(comps[i].begin(), comps[i].end(), comps[j].begin(), comps[j].end(),
                          std::back_inserter(common));
    return !common.empty();
  };
  LawReport left{"b∼b′ ⇒ a∗b ∼ a∗b′", true, 0, {}};
  LawReport right{"a∼b ⇒ a∗c ∼ b∗c", true, 0, {}};
  for (std::size_t i = 0; i < evs.size(); ++i)
    for (std::size_t j = 0; j < evs.size(); ++j) {
      if (i == j || !persp(i, j)) continue;
      for (const auto& c : evs) {
        auto l1 = event_product(pi, c, evs[i]), l2 = event_product(pi, c, evs[j]);
        if (l1 && l2 && ts.is_event(*l1) && ts.is_event(*l2)) {
          ++left.points;
          if (!perspective_events(ts, *l1, *l2))
            detail::fail_at(left, ts.format(c) + "∗" + ts.format(evs[i]) + " vs " + ts.format(c) + "∗" + ts.format(evs[j]));
        }
        auto r1 = event_product(pi, evs[i], c), r2 = event_product(pi, evs[j], c);
        if (r1 && r2 && ts.is_event(*r1) && ts.is_event(*r2)) {
          ++right.points;
          if (!perspective_events(ts, *r1, *r2))
            detail::fail_at(right, ts.format(evs[i]) + "∼" + ts.format(evs[j]) + " but not after ∗" + ts.format(c));
        }
      }
    }
  return {left, right};
}

// ===========================================================================
// G-algebras

struct GAlgebra {
  const Model* model = nullptr;
  Coherence sigma;
  SequentialProduct pi;
  std::vector<LawReport> laws;
};

struct GAlgebraOptions {
  std::size_t probe_depth = 2;
  SequentialOptions sequential{};
  std::size_t cap = default_cap();
};

/**
 * @brief Checks σ(a₁∗⋯∗aₙ) = σ(a₁)∗⋯∗σ(aₙ) for event strings up to probe_depth, by
 * two routes: iterated event products, and the composite map γ = σ∘#π applied to
 * ℓ(a₁,…,aₙ). Also γ∘η = id on outcomes.
 * @throws NotGAlgebra with the failing string; NotCoherence / NotSequential from the parts.
 */
inline GAlgebra validate_g_algebra(const Model& m, const CoarseModel& sharp, const CoherenceMap& sigma,
                                   const SequentialProduct& pi, const GAlgebraOptions& opt = {}) {
  GAlgebra g;
  g.model = &m;
  g.sigma = validate_coherence(m, sharp, sigma, opt.cap);
  validate_sequential(m, pi, opt.sequential);
  g.pi = pi;
  const TestSpace& ts = m.ts();
  const SharpSpace& s = sharp.space;
  const bool window = pi.nulls == SequentialProduct::Nulls::OutsideWindow;

  LawReport hom{"σ is a homomorphism on event strings", true, 0, {}};
  LawReport beck{"α∘Sβ = β∘Tα∘ℓ", true, 0, {}};
  LawReport unit{"γ∘η = id", true, 0, {}};

  auto fold_outcomes = [&](const std::vector<Oid>& xs) -> std::optional<Oid> {
    std::optional<Oid> acc = pi.unit;
    for (Oid x : xs) acc = pi(acc, x);
    return acc;
  };

  for (const auto& w : detail::all_words(s.underlying.size(), opt.probe_depth, opt.cap)) {
    if (w.empty()) continue;
    std::vector<Event> evs;
    std::vector<Oid> sig;
    for (Oid a : w) {
      evs.push_back(s.underlying[a]);
      sig.push_back(sigma.map[a]);
    }
    // Right side: σ(a₁)∗⋯∗σ(aₙ).
    std::optional<Oid> rhs = fold_outcomes(sig);

    // Route 1: iterated event products, then σ.
    std::optional<Event> prod = Event{pi.unit};
    bool undefined = false;
    for (const auto& a : evs) {
      prod = event_product(pi, *prod, a);
      if (!prod) {
        undefined = true;
        break;
      }
    }
    // Route 2: ℓ then #π then σ.
    Event pushed;
    bool outside = false;
    for (const auto& str : ell(evs)) {
      auto v = fold_outcomes(str);
      if (!v) {
        if (window) outside = true;
        continue;
      }
      pushed.push_back(*v);
    }
    if (window && (outside || !rhs)) continue;
    pushed = normalized(std::move(pushed));

    std::string at = "(";
    for (std::size_t i = 0; i < evs.size(); ++i) at += (i ? "," : "") + ts.format(evs[i]);
    at += ")";
    ++hom.points;
    if (undefined) {
      if (rhs) detail::fail_at(hom, at + ": event product vanishes but σ-product does not");
    } else {
      auto id = s.find(*prod);
      if (!id) detail::fail_at(hom, at + ": product " + ts.format(*prod) + " is not an event");
      else if (!rhs || sigma.map[*id] != *rhs) detail::fail_at(hom, at);
    }
    ++beck.points;
    if (pushed.empty()) {
      if (rhs) detail::fail_at(beck, at + ": γ∘ℓ vanishes");
    } else {
      auto id = s.find(pushed);
      if (!id) detail::fail_at(beck, at + ": #π∘ℓ is not an event");
      else if (!rhs || sigma.map[*id] != *rhs) detail::fail_at(beck, at);
    }
  }
  for (Oid x = 0; x < ts.size(); ++x) {
    ++unit.points;
    auto v = fold_outcomes({x});
    if (!v || sigma.map[s.singleton(*v)] != x) detail::fail_at(unit, ts.label(x));
  }
  g.laws = {hom, beck, unit};
  for (const auto& l : g.laws)
    if (!l.holds) throw Error(ErrorCode::NotGAlgebra, l.law + " fails at " + l.witness);
  return g;
}

/// x∗σ(a) = σ(x∗a) for outcomes x and nonempty events a.
inline LawReport check_sharp_module(const Coherence& c, const SequentialProduct& pi) {
  const TestSpace& ts = c.model->ts();
  const SharpSpace& s = c.sharp->space;
  LawReport r{"x∗σ(a) = σ(x∗a)", true, 0, {}};
  for (Oid x = 0; x < ts.size(); ++x)
    for (Oid ai = 0; ai < s.underlying.size(); ++ai) {
      auto lhs = pi(x, c.sigma.map[ai]);
      auto prod = event_product(pi, Event{x}, s.underlying[ai]);
      if (!lhs && !prod) continue;
      ++r.points;
      auto id = prod ? s.find(*prod) : std::nullopt;
      if (!lhs || !id || c.sigma.map[*id] != *lhs)
        detail::fail_at(r, ts.label(x) + "∗σ(" + ts.format(s.underlying[ai]) + ")");
    }
  return r;
}

inline bool is_commutative(const SequentialProduct& pi) {
  for (std::size_t i = 0; i < pi.table.size(); ++i)
    for (std::size_t j = i + 1; j < pi.table.size(); ++j)
      if (pi.table[i][j] != pi.table[j][i]) return false;
  return true;
}

/**
 * @brief For an algebraic commutative G-algebra: EF refines both E and F for every pair
 * of tests, and the logic is Boolean.
 * @throws HypothesisUnmet if not algebraic or not commutative.
 */
inline bool prop5_check(const GAlgebra& g, std::size_t cap = default_cap()) {
  const TestSpace& ts = g.model->ts();
  if (!is_algebraic(ts)) throw Error(ErrorCode::HypothesisUnmet, "not algebraic");
  if (!is_commutative(g.pi)) throw Error(ErrorCode::HypothesisUnmet, "π is not commutative");
  for (const auto& e : ts.tests())
    for (const auto& f : ts.tests()) {
      auto ef = event_product(g.pi, e, f);
      if (!ef || !ts.is_test(*ef)) return false;
      // y ∼ yE ⊆ EF for every y ∈ F, and symmetrically.
      for (Oid y : f) {
        auto ye = event_product(g.pi, Event{y}, e);
        if (!ye || !is_subset(*ye, *ef) || !perspective_events(ts, Event{y}, *ye)) return false;
      }
      for (Oid x : e) {
        auto xf = event_product(g.pi, Event{x}, f);
        if (!xf || !is_subset(*xf, *ef) || !perspective_events(ts, Event{x}, *xf)) return false;
      }
    }
  return build_logic(ts, cap).is_boolean();
}

// ===========================================================================
// Interference

/**
 * @brief What interference search needs: σ on some events, compound outcomes x·y, and states.
 *
 * `compound(x, y)` names the outcome "x then y" where y ranges over `continuations`;
 * nullopt means that branch has probability zero (absorbed) for every state.
 */
struct InterferenceData {
  const TestSpace* ts = nullptr;
  std::vector<std::pair<Event, Oid>> sigma;  // (a, σ(a)) with |a| ≥ 2
  std::vector<std::string> continuations;
  std::function<std::optional<Oid>(Oid, std::size_t)> compound;
  std::vector<Weight> states;
  ScalarConfig scalar;
  bool skip_undefined = false;  // nullopt means "beyond the window": drop the whole (a, y) cell
};

struct InterferenceWitness {
  std::size_t state = 0;
  Event event;
  std::size_t witness = 0;
  std::string event_label;
  std::string witness_label;
  Rational coherent;
  Rational incoherent;
  Rational gap;  // coherent − incoherent
};

/// Every (ω, a, y) with ω(σ(a)y) ≠ Σ_{x∈a} ω(xy) beyond the tolerance, in scan order.
inline std::vector<InterferenceWitness> find_interference(const InterferenceData& d,
                                                          std::optional<double> tolerance = std::nullopt) {
  ScalarConfig sc = d.scalar;
  if (tolerance) sc = ScalarConfig{ScalarKind::Float, *tolerance};
  std::vector<InterferenceWitness> out;
  auto value = [&](const Weight& w, std::optional<Oid> o) { return o ? w[*o] : Rational(0); };
  for (std::size_t si = 0; si < d.states.size(); ++si)
    for (const auto& [a, q] : d.sigma)
      for (std::size_t y = 0; y < d.continuations.size(); ++y) {
        const Weight& w = d.states[si];
        if (d.skip_undefined) {
          bool defined = d.compound(q, y).has_value();
          for (Oid x : a) defined = defined && d.compound(x, y).has_value();
          if (!defined) continue;
        }
        Rational coh = value(w, d.compound(q, y));
        Rational inc = 0;
        for (Oid x : a) inc += value(w, d.compound(x, y));
        if (sc.eq(coh, inc)) continue;
        out.push_back({si, a, y, d.ts->format(a), d.continuations[y], coh, inc, Rational(coh - inc)});
      }
  return out;
}

/// The data of a G-algebra (or any coherence with a sequential product) over the given states.
inline InterferenceData interference_data(const Coherence& c, const SequentialProduct& pi,
                                          std::vector<Weight> states) {
  InterferenceData d;
  d.ts = &c.model->ts();
  d.scalar = c.model->scalar();
  d.states = std::move(states);
  const SharpSpace& s = c.sharp->space;
  for (Oid ai = 0; ai < s.underlying.size(); ++ai)
    if (s.underlying[ai].size() >= 2) d.sigma.emplace_back(s.underlying[ai], c.sigma.map[ai]);
  d.continuations = d.ts->labels();
  d.skip_undefined = pi.nulls == SequentialProduct::Nulls::OutsideWindow;
  SequentialProduct p = pi;
  d.compound = [p](Oid x, std::size_t y) { return p(x, static_cast<Oid>(y)); };
  return d;
}

/// States used to scan a model: its generators, or the vertices of a full polytope.
inline std::vector<Weight> scan_states(const Model& m, std::size_t vertex_cap = 10000) {
  auto g = state_generators(m, vertex_cap);
  if (!g) throw Error(ErrorCode::EnumerationCapExceeded, "vertex enumeration for the interference scan");
  return *g;
}

/// {σ(a)y} ∼ ay for every nonempty event a and outcome y where both are defined.
inline LawReport prop6_identity_check(const GAlgebra& g) {
  const TestSpace& ts = g.model->ts();
  const SharpSpace& s = g.sigma.sharp->space;
  LawReport r{"σ(a)y ∼ ay", true, 0, {}};
  for (Oid ai = 0; ai < s.underlying.size(); ++ai)
    for (Oid y = 0; y < ts.size(); ++y) {
      auto qy = g.pi(g.sigma.sigma.map[ai], y);
      auto ay = event_product(g.pi, s.underlying[ai], Event{y});
      if (!qy && !ay) continue;
      ++r.points;
      if (!qy || !ay || !ts.is_event(*ay) || !perspective_events(ts, Event{*qy}, *ay))
        detail::fail_at(r, ts.format(s.underlying[ai]) + "·" + ts.label(y));
    }
  return r;
}

// ===========================================================================
// The free window: (Aⁿ)^# with σ = μ and elementwise concatenation

struct FreeWindow {
  TruncatedCompound compound;   // Aⁿ
  CoarseModel sharp;            // B = (Aⁿ)^#
  CoarseModel sharp2;           // B^#
  CoherenceMap sigma;           // μ: B^# → B
  SequentialProduct pi;         // setwise concatenation on B
};

inline FreeWindow free_window(const Model& m, std::size_t depth, std::size_t cap = default_cap()) {
  TruncatedCompound c = truncated_compound(m, depth, cap);
  CoarseModel b = coarsen(c.model, cap);
  CoarseModel b2 = coarsen(b.model, cap);
  CoherenceMap sigma{detail::mu_map(b.space, b2.space)};
  SequentialProduct pi = setwise_sequential(b.space, concatenation_product(c.space));
  return FreeWindow{std::move(c), std::move(b), std::move(b2), std::move(sigma), std::move(pi)};
}

}  // namespace orthokit
