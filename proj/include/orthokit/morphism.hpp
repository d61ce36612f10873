#pragma once

#include <string>
#include <vector>

#include "orthokit/states.hpp"

namespace orthokit {

inline OutcomeSet image(const std::vector<Oid>& map, const OutcomeSet& a) {
  OutcomeSet out;
  out.reserve(a.size());
  for (Oid x : a) out.push_back(map.at(x));
  return normalized(std::move(out));
}

/// Status of condition (d) after validation.
enum class PullbackStatus { Verified, Unverified };

/**
 * @brief A validated morphism of models.
 *
 * Source and target are held by pointer; equality of morphisms is pointwise map
 * equality with models compared by identity.
 */
struct Morphism {
  const Model* source = nullptr;
  const Model* target = nullptr;
  std::vector<Oid> map;
  bool test_preserving = false;
  bool embedding = false;
  PullbackStatus pullback = PullbackStatus::Verified;

  Oid operator()(Oid x) const { return map.at(x); }
  OutcomeSet operator()(const OutcomeSet& a) const { return image(map, a); }

  friend bool operator==(const Morphism& l, const Morphism& r) {
    return l.source == r.source && l.target == r.target && l.map == r.map;
  }
};

struct MorphismOptions {
  std::size_t vertex_cap = 10000;
  std::size_t samples = 256;
  std::uint64_t seed = 0x5eed;
};

namespace detail {

inline std::string fmt_pair(const TestSpace& ts, Oid x, Oid y) {
  return "(" + ts.label(x) + "," + ts.label(y) + ")";
}

}  // namespace detail

/// Checks conditions (a)-(c) only, on bare test spaces. Throws on failure.
inline bool check_test_space_morphism(const TestSpace& src, const TestSpace& dst,
                                      const std::vector<Oid>& map) {
  if (map.size() != src.size())
    throw Error(ErrorCode::DomainMismatch, "map is not total on the source outcomes");
  for (Oid v : map)
    if (v >= dst.size()) throw Error(ErrorCode::DomainMismatch, "map leaves the target");
  // (a) orthogonality preservation
  for (const auto& t : src.tests())
    for (std::size_t i = 0; i < t.size(); ++i)
      for (std::size_t j = i + 1; j < t.size(); ++j)
        if (!dst.orthogonal(map[t[i]], map[t[j]]))
          throw Error(ErrorCode::NotLocallyInjective,
                      "x⊥y but φ(x),φ(y) not orthogonal at " + detail::fmt_pair(src, t[i], t[j]));
  // (b) images of tests are events
  std::vector<OutcomeSet> images;
  bool all_tests = true;
  for (const auto& t : src.tests()) {
    auto im = image(map, t);
    if (!dst.is_event(im))
      throw Error(ErrorCode::ImageNotEvent, "image of " + src.format(t) + " is not an event");
    all_tests = all_tests && dst.is_test(im);
    images.push_back(std::move(im));
  }
  // (c) pairwise perspectivity of images; trivial when every image is a test.
  if (all_tests) return true;
  std::vector<std::vector<Event>> comps;
  comps.reserve(images.size());
  for (const auto& im : images) comps.push_back(complements(dst, im));
  for (std::size_t i = 0; i < images.size(); ++i)
    for (std::size_t j = i + 1; j < images.size(); ++j) {
      bool ok = false;
      auto a = comps[i].begin();
      auto b = comps[j].begin();
      while (a != comps[i].end() && b != comps[j].end()) {
        if (*a < *b) ++a;
        else if (*b < *a) ++b;
        else {
          ok = true;
          break;
        }
      }
      if (!ok)
        throw Error(ErrorCode::ImagesNotPerspective,
                    "images of " + src.format(src.test(i)) + " and " + src.format(src.test(j)) +
                        " are not perspective");
    }
  return false;
}

/**
 * @brief Validates conditions (a)-(d) and computes the flags.
 *
 * Condition (d) is checked on the generators of Ω(target), or the vertices of a full
 * target polytope; if vertex enumeration hits its cap, seeded samples are used and the
 * result is marked Unverified. For a full source the pullback cone is "equal test
 * sums", which (c) already guarantees.
 */
inline Morphism validate_morphism(const Model& src, const Model& dst, std::vector<Oid> map,
                                  const MorphismOptions& opt = {}) {
  check_test_space_morphism(src.ts(), dst.ts(), map);
  Morphism m;
  m.source = &src;
  m.target = &dst;
  m.map = std::move(map);

  m.test_preserving = true;
  for (const auto& t : src.ts().tests())
    if (!dst.ts().is_test(image(m.map, t))) {
      m.test_preserving = false;
      break;
    }
  std::vector<bool> hit(dst.ts().size(), false);
  bool injective = true;
  for (Oid v : m.map) {
    if (hit[v]) injective = false;
    hit[v] = true;
  }
  m.embedding = m.test_preserving && injective;

  if (src.omega().is_full()) {
    // Pullbacks of all weights have equal test sums by (c); nothing further to certify.
    m.pullback = PullbackStatus::Verified;
    return m;
  }
  std::vector<Weight> certificate;
  if (!dst.omega().is_full()) {
    certificate = dst.omega().generators;
  } else {
    auto v = enumerate_vertices(dst.ts(), opt.vertex_cap);
    if (v.complete) {
      certificate = std::move(v.vertices);
    } else {
      certificate = sample_states(dst, opt.samples, opt.seed);
      m.pullback = PullbackStatus::Unverified;
    }
  }
  for (const auto& beta : certificate) {
    Weight pull(src.ts().size());
    for (Oid x = 0; x < src.ts().size(); ++x) pull[x] = beta[m.map[x]];
    if (!contains_ray(src, pull))
      throw Error(ErrorCode::PullbackNotState, "pullback of a target state is not a multiple of a source state");
  }
  return m;
}

inline Morphism identity_morphism(const Model& m) {
  std::vector<Oid> map(m.ts().size());
  for (Oid x = 0; x < map.size(); ++x) map[x] = x;
  return validate_morphism(m, m, std::move(map));
}

/// ψ∘φ, revalidated.
inline Morphism compose(const Morphism& psi, const Morphism& phi) {
  if (phi.target != psi.source)
    throw Error(ErrorCode::DomainMismatch, "codomain of φ is not the domain of ψ");
  std::vector<Oid> map(phi.map.size());
  for (Oid x = 0; x < map.size(); ++x) map[x] = psi.map[phi.map[x]];
  return validate_morphism(*phi.source, *psi.target, std::move(map));
}

/**
 * @brief Exhaustive check that a ∼ b implies φ(a) ∼ φ(b); works on unvalidated maps.
 * @return a failing pair of source events, if any.
 */
inline std::optional<PairWitness> lemma1_witness(const TestSpace& src, const TestSpace& dst,
                                                 const std::vector<Oid>& map,
                                                 std::size_t cap = default_cap()) {
  for (const auto& a : events(src, cap)) {
    auto ia = image(map, a);
    auto ca = complements(dst, ia);
    for (const auto& c : complements(src, a)) {
      for (const auto& b : complements(src, c)) {
        if (b == a) continue;
        auto cb = complements(dst, image(map, b));
        std::vector<Event> common;
        std::set_intersection(ca.begin(), ca.end(), cb.begin(), cb.end(),
                              std::back_inserter(common));
        if (common.empty()) return PairWitness{a, b};
      }
    }
  }
  return std::nullopt;
}

inline bool lemma1_check(const Morphism& phi, std::size_t cap = default_cap()) {
  return !lemma1_witness(phi.source->ts(), phi.target->ts(), phi.map, cap).has_value();
}

/// If φ is an embedding and ψ∘φ = id then ψ is test-preserving.
inline bool lemma2_check(const Morphism& phi, const Morphism& psi) {
  if (!phi.embedding) throw Error(ErrorCode::HypothesisUnmet, "φ is not an embedding");
  if (phi.target != psi.source || psi.target != phi.source)
    throw Error(ErrorCode::HypothesisUnmet, "ψ is not a map back to the source of φ");
  for (Oid x = 0; x < phi.map.size(); ++x)
    if (psi.map[phi.map[x]] != x) throw Error(ErrorCode::HypothesisUnmet, "ψ∘φ is not the identity");
  return psi.test_preserving;
}

}  // namespace orthokit
