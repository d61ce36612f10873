#pragma once

#include <numeric>
#include <string>
#include <unordered_map>
#include <vector>

#include "orthokit/morphism.hpp"
#include "orthokit/testspace.hpp"

namespace orthokit {

/**
 * @brief Finite orthoalgebra given by a partial ⊕ table.
 *
 * Element ids are dense; `kUndef` marks undefined sums. When built from a test
 * space, each element keeps its lexicographically least representative event.
 */
class Orthoalgebra {
 public:
  static constexpr std::size_t kUndef = static_cast<std::size_t>(-1);

  Orthoalgebra() = default;

  /// Abstract constructor; validates the orthoalgebra laws.
  Orthoalgebra(std::vector<std::string> names, std::vector<std::vector<std::size_t>> oplus,
               std::size_t zero, std::size_t one)
      : names_(std::move(names)), oplus_(std::move(oplus)), zero_(zero), one_(one) {
    finish();
  }

  std::size_t size() const { return names_.size(); }
  std::size_t zero() const { return zero_; }
  std::size_t one() const { return one_; }
  const std::string& name(std::size_t p) const { return names_.at(p); }
  const std::vector<std::string>& names() const { return names_; }

  bool orthogonal(std::size_t p, std::size_t q) const { return oplus_[p][q] != kUndef; }
  std::size_t oplus(std::size_t p, std::size_t q) const { return oplus_[p][q]; }
  const std::vector<std::vector<std::size_t>>& table() const { return oplus_; }
  std::size_t complement(std::size_t p) const { return complement_[p]; }

  /// b ≤ a iff a = b ⊕ c for some c.
  bool leq(std::size_t b, std::size_t a) const { return leq_[b][a]; }

  /// Least upper bound, if it exists.
  std::optional<std::size_t> join(std::size_t p, std::size_t q) const {
    return extremal_bound(p, q, true);
  }
  std::optional<std::size_t> meet(std::size_t p, std::size_t q) const {
    return extremal_bound(p, q, false);
  }

  /// Orthomodular poset: p ⊥ q implies p ⊕ q is the join.
  bool is_omp() const {
    for (std::size_t p = 0; p < size(); ++p)
      for (std::size_t q = 0; q < size(); ++q) {
        if (!orthogonal(p, q)) continue;
        std::size_t s = oplus_[p][q];
        for (std::size_t u = 0; u < size(); ++u)
          if (leq_[p][u] && leq_[q][u] && !leq_[s][u]) return false;
      }
    return true;
  }

  bool is_lattice() const {
    for (std::size_t p = 0; p < size(); ++p)
      for (std::size_t q = p + 1; q < size(); ++q)
        if (!join(p, q) || !meet(p, q)) return false;
    return true;
  }

  /// Orthomodular, a lattice, and distributive.
  bool is_boolean() const {
    if (!is_omp() || !is_lattice()) return false;
    const std::size_t k = size();
    std::vector<std::vector<std::size_t>> J(k, std::vector<std::size_t>(k)), M = J;
    for (std::size_t p = 0; p < k; ++p)
      for (std::size_t q = 0; q < k; ++q) {
        J[p][q] = *join(p, q);
        M[p][q] = *meet(p, q);
      }
    for (std::size_t p = 0; p < k; ++p)
      for (std::size_t q = 0; q < k; ++q)
        for (std::size_t r = 0; r < k; ++r)
          if (M[p][J[q][r]] != J[M[p][q]][M[p][r]]) return false;
    return true;
  }

  std::vector<std::size_t> atoms() const {
    std::vector<std::size_t> out;
    for (std::size_t p = 0; p < size(); ++p) {
      if (p == zero_) continue;
      bool minimal = true;
      for (std::size_t q = 0; q < size() && minimal; ++q)
        if (q != zero_ && q != p && leq_[q][p]) minimal = false;
      if (minimal) out.push_back(p);
    }
    return out;
  }

  std::string classification() const {
    if (is_boolean()) return "Boolean";
    if (is_omp()) return "OMP";
    return "orthoalgebra";
  }

 protected:
  void finish() {
    const std::size_t k = size();
    if (oplus_.size() != k) throw Error(ErrorCode::LawViolation, "⊕ table has wrong size");
    for (const auto& row : oplus_)
      if (row.size() != k) throw Error(ErrorCode::LawViolation, "⊕ table has wrong size");
    auto law = [](const std::string& what) { return Error(ErrorCode::LawViolation, what); };
    for (std::size_t p = 0; p < k; ++p) {
      if (oplus_[zero_][p] != p || oplus_[p][zero_] != p) throw law("0 is not a ⊕ identity");
      for (std::size_t q = 0; q < k; ++q)
        if (oplus_[p][q] != oplus_[q][p]) throw law("⊕ is not commutative");
    }
    // (a) associativity
    for (std::size_t p = 0; p < k; ++p)
      for (std::size_t q = 0; q < k; ++q) {
        std::size_t pq = oplus_[p][q];
        if (pq == kUndef) continue;
        for (std::size_t r = 0; r < k; ++r) {
          std::size_t pq_r = oplus_[pq][r];
          if (pq_r == kUndef) continue;
          std::size_t qr = oplus_[q][r];
          if (qr == kUndef || oplus_[p][qr] == kUndef || oplus_[p][qr] != pq_r)
            throw law("⊕ is not associative at (" + names_[p] + "," + names_[q] + "," + names_[r] + ")");
        }
      }
    // (b) unique complement
    complement_.assign(k, kUndef);
    for (std::size_t p = 0; p < k; ++p) {
      for (std::size_t q = 0; q < k; ++q) {
        if (oplus_[p][q] != one_) continue;
        if (complement_[p] != kUndef) throw law("complement of " + names_[p] + " is not unique");
        complement_[p] = q;
      }
      if (complement_[p] == kUndef) throw law(names_[p] + " has no complement");
    }
    // (c) consistency
    for (std::size_t p = 0; p < k; ++p)
      if (oplus_[p][p] != kUndef && p != zero_) throw law(names_[p] + " ⊥ itself but is not 0");
    leq_.assign(k, std::vector<bool>(k, false));
    for (std::size_t b = 0; b < k; ++b)
      for (std::size_t c = 0; c < k; ++c)
        if (oplus_[b][c] != kUndef) leq_[b][oplus_[b][c]] = true;
  }

  std::optional<std::size_t> extremal_bound(std::size_t p, std::size_t q, bool upper) const {
    std::optional<std::size_t> best;
    for (std::size_t u = 0; u < size(); ++u) {
      bool bound = upper ? (leq_[p][u] && leq_[q][u]) : (leq_[u][p] && leq_[u][q]);
      if (!bound) continue;
      if (!best || (upper ? leq_[u][*best] : leq_[*best][u])) best = u;
    }
    if (!best) return std::nullopt;
    for (std::size_t u = 0; u < size(); ++u) {
      bool bound = upper ? (leq_[p][u] && leq_[q][u]) : (leq_[u][p] && leq_[u][q]);
      if (bound && !(upper ? leq_[*best][u] : leq_[u][*best])) return std::nullopt;
    }
    return best;
  }

  std::vector<std::string> names_;
  std::vector<std::vector<std::size_t>> oplus_;
  std::size_t zero_ = 0, one_ = 0;
  std::vector<std::size_t> complement_;
  std::vector<std::vector<bool>> leq_;
};

/// Π(ℳ) together with the event-to-class map.
class Logic : public Orthoalgebra {
 public:
  const TestSpace& space() const { return *ts_; }
  const Event& representative(std::size_t p) const { return reps_.at(p); }
  std::size_t class_of(const Event& a) const {
    auto it = class_of_.find(ts_->bits(a));
    if (it == class_of_.end()) throw Error(ErrorCode::NotAnEvent, ts_->format(a) + " is not an event");
    return it->second;
  }
  const std::vector<Event>& all_events() const { return events_; }

  friend Logic build_logic(const TestSpace& ts, std::size_t cap);

 private:
  const TestSpace* ts_ = nullptr;
  std::vector<Event> reps_;
  std::vector<Event> events_;
  std::unordered_map<Bits, std::size_t, BitsHash> class_of_;
};

/**
 * @brief Builds the logic of an algebraic test space and validates it.
 *
 * Perspectivity classes are recomputed and checked to be transitive; non-algebraic
 * input is refused.
 */
inline Logic build_logic(const TestSpace& ts, std::size_t cap = default_cap()) {
  if (auto w = algebraic_witness(ts))
    throw Error(ErrorCode::NotAlgebraic, "a=" + ts.format(w->a) + " b=" + ts.format(w->b) +
                                             " c=" + ts.format(w->c));
  Logic L;
  L.ts_ = &ts;
  L.events_ = events(ts, cap);
  const auto& ev = L.events_;
  const std::size_t n = ev.size();
  std::unordered_map<Bits, std::size_t, BitsHash> idx;
  idx.reserve(n);
  for (std::size_t i = 0; i < n; ++i) idx.emplace(ts.bits(ev[i]), i);

  // P(a) = {b : a oc c oc b for some c}
  std::vector<std::vector<std::size_t>> persp(n);
  std::vector<std::vector<Event>> comps(n);
  for (std::size_t i = 0; i < n; ++i) comps[i] = complements(ts, ev[i]);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& c : comps[i])
      for (const auto& b : comps[idx.at(ts.bits(c))]) persp[i].push_back(idx.at(ts.bits(b)));
    std::sort(persp[i].begin(), persp[i].end());
    persp[i].erase(std::unique(persp[i].begin(), persp[i].end()), persp[i].end());
  }
  // Classes: since events are sorted, the class id order follows least representatives.
  std::vector<std::size_t> cls(n, Orthoalgebra::kUndef);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (cls[i] != Orthoalgebra::kUndef) continue;
    for (std::size_t j : persp[i]) {
      if (cls[j] != Orthoalgebra::kUndef)
        throw Error(ErrorCode::LawViolation, "perspectivity is not transitive");
      cls[j] = k;
    }
    L.reps_.push_back(ev[i]);
    ++k;
  }
  for (std::size_t i = 0; i < n; ++i) {
    // Transitivity: the perspectivity set of every member is its whole class.
    const auto& first = persp[idx.at(ts.bits(L.reps_[cls[i]]))];
    if (persp[i] != first) throw Error(ErrorCode::LawViolation, "perspectivity is not transitive");
  }
  for (std::size_t i = 0; i < n; ++i) L.class_of_.emplace(ts.bits(ev[i]), cls[i]);

  // ⊕ from every orthogonal pair, checking well-definedness.
  std::vector<std::vector<std::size_t>> table(k, std::vector<std::size_t>(k, Orthoalgebra::kUndef));
  std::vector<Bits> eb;
  eb.reserve(n);
  for (const auto& e : ev) eb.push_back(ts.bits(e));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (eb[i].intersects(eb[j])) continue;
      Bits u = eb[i] | eb[j];
      auto it = idx.find(u);
      if (it == idx.end()) continue;
      std::size_t r = cls[it->second];
      auto& slot = table[cls[i]][cls[j]];
      if (slot == Orthoalgebra::kUndef) slot = r;
      else if (slot != r) throw Error(ErrorCode::LawViolation, "⊕ is not well defined on classes");
    }
  // Orthogonality must not depend on representatives.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      bool orth = !eb[i].intersects(eb[j]) && idx.count(eb[i] | eb[j]);
      if (!orth && table[cls[i]][cls[j]] != Orthoalgebra::kUndef) {
        // a ∼ b ⊥ c ⇒ a ⊥ c
        if (cls[i] != cls[j] || cls[i] != cls[idx.at(ts.bits({}))])
          throw Error(ErrorCode::LawViolation, "orthogonality depends on representatives");
      }
    }
  std::vector<std::string> names(k);
  for (std::size_t p = 0; p < k; ++p) names[p] = ts.format(L.reps_[p]);
  L.names_ = std::move(names);
  L.oplus_ = std::move(table);
  L.zero_ = cls[idx.at(Bits(ts.size()))];
  L.one_ = cls[idx.at(ts.test_bits(0))];
  L.finish();
  return L;
}

/// Checks that f : L1 → L2 is a bijection preserving and reflecting ⊕.
inline bool is_isomorphism(const Orthoalgebra& l1, const Orthoalgebra& l2,
                           const std::vector<std::size_t>& f) {
  if (l1.size() != l2.size() || f.size() != l1.size()) return false;
  std::vector<bool> hit(l2.size(), false);
  for (auto v : f) {
    if (v >= l2.size() || hit[v]) return false;
    hit[v] = true;
  }
  for (std::size_t p = 0; p < l1.size(); ++p)
    for (std::size_t q = 0; q < l1.size(); ++q) {
      std::size_t a = l1.oplus(p, q);
      std::size_t b = l2.oplus(f[p], f[q]);
      if ((a == Orthoalgebra::kUndef) != (b == Orthoalgebra::kUndef)) return false;
      if (a != Orthoalgebra::kUndef && f[a] != b) return false;
    }
  return true;
}

// ---------------------------------------------------------------------------
// Atomicity

/// x is atomic iff every event perspective to {x} is a singleton.
inline bool is_atomic_outcome(const TestSpace& ts, Oid x) {
  for (const auto& c : complements(ts, Event{x}))
    for (const auto& b : complements(ts, c))
      if (b.size() != 1) return false;
  return true;
}

inline bool is_totally_nonatomic(const TestSpace& ts) {
  for (Oid x = 0; x < ts.size(); ++x)
    if (is_atomic_outcome(ts, x)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Orthopartitions of unity

/// 𝒟(L): finite subsets of L \ {0} whose ⊕ is 1; outcome labels are element names.
inline TestSpace dl_test_space(const Orthoalgebra& L, std::size_t cap = default_cap()) {
  std::vector<OutcomeSet> tests;
  std::vector<std::size_t> stack;
  std::function<void(std::size_t, std::size_t)> dfs = [&](std::size_t start, std::size_t sum) {
    for (std::size_t q = start; q < L.size(); ++q) {
      if (q == L.zero() || !L.orthogonal(sum, q)) continue;
      std::size_t s = L.oplus(sum, q);
      stack.push_back(q);
      if (s == L.one()) {
        tests.emplace_back(stack.begin(), stack.end());
        check_cap(tests.size(), cap, "orthopartitions of unity");
      } else {
        dfs(q + 1, s);
      }
      stack.pop_back();
    }
  };
  dfs(0, L.zero());
  // Outcome ids are element ids with 0 removed.
  std::vector<Oid> remap(L.size(), 0);
  std::vector<std::string> labels;
  for (std::size_t p = 0; p < L.size(); ++p) {
    if (p == L.zero()) continue;
    remap[p] = static_cast<Oid>(labels.size());
    labels.push_back(L.name(p));
  }
  for (auto& t : tests)
    for (auto& x : t) x = remap[x];
  return TestSpace(std::move(labels), std::move(tests));
}

/// L ≅ Π(𝒟(L)) via p ↦ [{p}], 0 ↦ [∅].
inline bool dl_round_trip(const Orthoalgebra& L, std::size_t cap = default_cap()) {
  TestSpace d = dl_test_space(L, cap);
  Logic pi = build_logic(d, cap);
  std::vector<std::size_t> f(L.size());
  for (std::size_t p = 0; p < L.size(); ++p) {
    if (p == L.zero()) f[p] = pi.class_of({});
    else f[p] = pi.class_of({d.id(L.name(p))});
  }
  return is_isomorphism(L, pi, f);
}

// ---------------------------------------------------------------------------
// Induced maps

/**
 * @brief [a] ↦ [φ(a)] between logics; checks well-definedness and ⊕-preservation.
 */
inline std::vector<std::size_t> induced_logic_map(const Logic& src, const Logic& dst,
                                                  const std::vector<Oid>& map) {
  std::vector<std::size_t> f(src.size(), Orthoalgebra::kUndef);
  for (const auto& a : src.all_events()) {
    std::size_t p = src.class_of(a);
    std::size_t q = dst.class_of(image(map, a));
    if (f[p] == Orthoalgebra::kUndef) f[p] = q;
    else if (f[p] != q) throw Error(ErrorCode::LawViolation, "induced map is not well defined");
  }
  for (std::size_t p = 0; p < src.size(); ++p)
    for (std::size_t q = 0; q < src.size(); ++q) {
      if (!src.orthogonal(p, q)) continue;
      if (!dst.orthogonal(f[p], f[q]) || dst.oplus(f[p], f[q]) != f[src.oplus(p, q)])
        throw Error(ErrorCode::LawViolation, "induced map does not preserve ⊕");
    }
  return f;
}

inline std::vector<std::size_t> induced_logic_map(const Logic& src, const Logic& dst,
                                                  const Morphism& phi) {
  return induced_logic_map(src, dst, phi.map);
}

}  // namespace orthokit
