#pragma once

#include <complex>
#include <functional>
#include <map>
#include <tuple>
#include <string>
#include <vector>

#include "orthokit/coarsening.hpp"
#include "orthokit/compound.hpp"
#include "orthokit/interference.hpp"

namespace orthokit {

// ===========================================================================
// Classical models

/// Kolmogorov model on S = {1..n} with σ = ⋃ and π = ∩.
struct KolmogorovModel {
  Model model;
  CoarseModel sharp;
  CoherenceMap sigma;
  SequentialProduct pi;
};

namespace detail {

inline std::string subset_label(unsigned mask, std::size_t n) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i)
    if (mask & (1U << i)) s += std::to_string(i + 1);
  return s;
}

}  // namespace detail

/// Outcomes are the nonempty subsets (labeled by their digits), tests the set partitions.
inline KolmogorovModel kolmogorov_model(std::size_t n, std::size_t cap = default_cap()) {
  if (n < 1 || n > 9) throw Error(ErrorCode::HypothesisUnmet, "kolmogorov model needs 1 ≤ n ≤ 9");
  const unsigned full = (1U << n) - 1;
  std::vector<std::string> labels;
  for (unsigned m = 1; m <= full; ++m) labels.push_back(detail::subset_label(m, n));
  auto id = [](unsigned mask) { return static_cast<Oid>(mask - 1); };
  OutcomeSet points;
  for (Oid i = 0; i < n; ++i) points.push_back(i);
  std::vector<OutcomeSet> tests;
  for (const auto& p : set_partitions(points, cap)) {
    OutcomeSet t;
    for (const auto& block : p) {
      unsigned mask = 0;
      for (Oid i : block) mask |= 1U << i;
      t.push_back(id(mask));
    }
    tests.push_back(normalized(std::move(t)));
  }
  Model m(TestSpace(std::move(labels), std::move(tests)), StateSpace::full());
  CoarseModel sharp = coarsen(m, cap);
  CoherenceMap sigma;
  for (const auto& a : sharp.space.underlying) {
    unsigned mask = 0;
    for (Oid x : a) mask |= x + 1;
    sigma.map.push_back(id(mask));
  }
  SequentialProduct pi;
  pi.unit = id(full);
  pi.nulls = SequentialProduct::Nulls::Absorbing;
  pi.table.assign(full, std::vector<std::optional<Oid>>(full));
  for (unsigned a = 1; a <= full; ++a)
    for (unsigned b = 1; b <= full; ++b)
      if (a & b) pi.table[id(a)][id(b)] = id(a & b);
  return KolmogorovModel{std::move(m), std::move(sharp), std::move(sigma), std::move(pi)};
}

// ===========================================================================
// Finite-dimensional Hilbert models

using Amplitude = std::complex<double>;
using Vec = std::vector<Amplitude>;

inline constexpr double kQuantumTau = 1e-9;

inline Amplitude inner(const Vec& u, const Vec& v) {
  Amplitude s = 0;
  for (std::size_t i = 0; i < u.size(); ++i) s += std::conj(u[i]) * v[i];
  return s;
}

inline double norm2(const Vec& v) { return std::real(inner(v, v)); }

/// An orthonormal basis with outcome labels.
struct Basis {
  std::vector<std::string> labels;
  std::vector<Vec> vectors;
};

/// Throws NotOrthonormal unless the vectors are an orthonormal basis of ℂ^dim.
inline void check_orthonormal(const Basis& b, std::size_t dim, double tau = kQuantumTau) {
  if (b.vectors.size() != dim || b.labels.size() != dim)
    throw Error(ErrorCode::NotOrthonormal, "a basis needs exactly dim labeled vectors");
  for (std::size_t i = 0; i < dim; ++i) {
    if (b.vectors[i].size() != dim) throw Error(ErrorCode::NotOrthonormal, "vector of wrong dimension");
    for (std::size_t j = i; j < dim; ++j) {
      double want = i == j ? 1.0 : 0.0;
      if (std::abs(inner(b.vectors[i], b.vectors[j]) - want) > tau)
        throw Error(ErrorCode::NotOrthonormal,
                    "⟨" + b.labels[i] + "|" + b.labels[j] + "⟩ = " + std::to_string(std::abs(inner(b.vectors[i], b.vectors[j]))));
    }
  }
}

/// A density operator given as an ensemble of (weight, pure vector).
struct Ensemble {
  std::vector<std::pair<double, Vec>> terms;

  static Ensemble pure(Vec v) { return Ensemble{{{1.0, std::move(v)}}}; }
  double born(const Vec& x) const {
    double p = 0;
    for (const auto& [w, v] : terms) p += w * std::norm(inner(x, v));
    return p;
  }
};

inline void check_state(const Ensemble& e, std::size_t dim, double tau = kQuantumTau) {
  double total = 0;
  for (const auto& [w, v] : e.terms) {
    if (w < -tau) throw Error(ErrorCode::NotAState, "negative ensemble weight");
    if (v.size() != dim) throw Error(ErrorCode::NotAState, "state of wrong dimension");
    if (std::abs(norm2(v) - 1.0) > tau) throw Error(ErrorCode::NotAState, "state vector is not normalized");
    total += w;
  }
  if (std::abs(total - 1.0) > tau) throw Error(ErrorCode::NotAState, "ensemble weights do not sum to 1");
}

/**
 * @brief Finitely many frames of ℂ^dim as a test space, with Born-rule states.
 *
 * Outcomes are identified by label; a label reused across bases must name the same ray.
 */
inline Model hilbert_slice_model(const std::vector<Basis>& bases, const std::vector<Ensemble>& states) {
  if (bases.empty()) throw Error(ErrorCode::NotOrthonormal, "need at least one basis");
  const std::size_t dim = bases.front().vectors.size();
  std::vector<std::string> labels;
  std::vector<Vec> rays;
  std::vector<OutcomeSet> tests;
  for (const auto& b : bases) {
    check_orthonormal(b, dim);
    OutcomeSet t;
    for (std::size_t i = 0; i < dim; ++i) {
      auto it = std::find(labels.begin(), labels.end(), b.labels[i]);
      if (it == labels.end()) {
        labels.push_back(b.labels[i]);
        rays.push_back(b.vectors[i]);
        t.push_back(static_cast<Oid>(labels.size() - 1));
      } else {
        Oid id = static_cast<Oid>(it - labels.begin());
        if (std::abs(std::abs(inner(rays[id], b.vectors[i])) - 1.0) > kQuantumTau)
          throw Error(ErrorCode::NotOrthonormal, "label " + b.labels[i] + " names two different rays");
        t.push_back(id);
      }
    }
    tests.push_back(normalized(std::move(t)));
  }
  std::vector<Weight> gens;
  for (const auto& s : states) {
    check_state(s, dim);
    Weight w;
    for (const auto& r : rays) w.push_back(Rational(s.born(r)));
    gens.push_back(std::move(w));
  }
  return Model(TestSpace(std::move(labels), std::move(tests)), StateSpace::of(std::move(gens)),
               ScalarConfig{ScalarKind::Float, kQuantumTau});
}

// ===========================================================================
// Iterated Stern-Gerlach experiments

/// Outcomes of `basis` listed in `members`, read out by one detector loop.
struct RecombinationGroup {
  std::size_t basis = 0;
  std::vector<std::size_t> members;
  std::string label;
};

struct SGStage {
  std::vector<Basis> bases;
  std::vector<RecombinationGroup> groups;
  std::vector<std::string> blocked;  // outcome labels whose beam ends here
};

struct SGPlan {
  std::size_t dim = 2;
  std::vector<SGStage> stages;
};

inline constexpr std::size_t kMaxSGStages = 3;

/// One recorded result of a stage: a basis and either a single index or a group.
struct SGSymbol {
  std::size_t stage = 0;
  std::size_t basis = 0;
  std::vector<std::size_t> members;  // size 1 for a fine outcome
  std::string label;
  bool operator<(const SGSymbol& o) const {
    return std::tie(stage, basis, members) < std::tie(o.stage, o.basis, o.members);
  }
  bool operator==(const SGSymbol& o) const {
    return stage == o.stage && basis == o.basis && members == o.members;
  }
};

struct SGModel {
  SGPlan plan;
  Vec initial;
  std::vector<std::vector<SGSymbol>> paths;  // outcome id → path
  Model model;
  std::vector<std::pair<Event, Oid>> sigma;  // first-stage groups
  std::vector<SGSymbol> continuations;       // second-stage fine outcomes

  std::optional<Oid> find(const std::vector<SGSymbol>& path) const {
    for (Oid i = 0; i < paths.size(); ++i)
      if (paths[i] == path) return i;
    return std::nullopt;
  }
};

namespace detail {

/// The symbol sets of the tests of one stage: fine, and each subset of groups recombined.
inline std::vector<std::vector<SGSymbol>> stage_tests(const SGStage& st, std::size_t k) {
  std::vector<std::vector<SGSymbol>> out;
  for (std::size_t b = 0; b < st.bases.size(); ++b) {
    std::vector<const RecombinationGroup*> gs;
    for (const auto& g : st.groups)
      if (g.basis == b) gs.push_back(&g);
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << gs.size()); ++mask) {
      std::vector<bool> used(st.bases[b].vectors.size(), false);
      std::vector<SGSymbol> t;
      for (std::size_t g = 0; g < gs.size(); ++g) {
        if (!((mask >> g) & 1U)) continue;
        for (auto i : gs[g]->members) used[i] = true;
        t.push_back({k, b, gs[g]->members, gs[g]->label});
      }
      for (std::size_t i = 0; i < used.size(); ++i)
        if (!used[i]) t.push_back({k, b, {i}, st.bases[b].labels[i]});
      std::sort(t.begin(), t.end());
      out.push_back(std::move(t));
    }
  }
  return out;
}

inline std::string path_label(const std::vector<SGSymbol>& p) {
  std::string s;
  for (std::size_t i = 0; i < p.size(); ++i) s += (i ? "." : "") + p[i].label;
  return s;
}

}  // namespace detail

/**
 * @brief The test space of all iterated experiments allowed by the plan, with the
 * state of `initial` under sequential Lüders conditioning.
 *
 * ω(o₁⋯o_k) = ‖P_{o_k}⋯P_{o₁}ψ‖², where a recombined outcome projects onto the span of
 * its members. After each unblocked outcome the experiment may stop or continue with any
 * test of the next stage.
 */
inline SGModel sg_compound_model(const SGPlan& plan, const Vec& initial) {
  if (plan.stages.empty()) throw Error(ErrorCode::HypothesisUnmet, "plan has no stages");
  if (plan.stages.size() > kMaxSGStages)
    throw Error(ErrorCode::DepthCapExceeded, "at most " + std::to_string(kMaxSGStages) + " stages");
  check_state(Ensemble::pure(initial), plan.dim);
  for (const auto& st : plan.stages) {
    for (const auto& b : st.bases) check_orthonormal(b, plan.dim);
    for (std::size_t i = 0; i < st.groups.size(); ++i)
      for (std::size_t j = i + 1; j < st.groups.size(); ++j)
        if (st.groups[i].basis == st.groups[j].basis) {
          const auto& a = st.groups[i].members;
          const auto& b = st.groups[j].members;
          for (auto x : a)
            if (std::find(b.begin(), b.end(), x) != b.end())
              throw Error(ErrorCode::HypothesisUnmet, "recombination groups overlap");
        }
  }

  SGModel out{plan, initial, {}, Model(), {}, {}};
  std::map<std::vector<SGSymbol>, Oid> ids;
  auto intern = [&](const std::vector<SGSymbol>& p) {
    auto [it, fresh] = ids.emplace(p, static_cast<Oid>(out.paths.size()));
    if (fresh) out.paths.push_back(p);
    return it->second;
  };
  auto blocked = [&](const SGSymbol& s) {
    const auto& bl = plan.stages[s.stage].blocked;
    return s.members.size() == 1 && std::find(bl.begin(), bl.end(), s.label) != bl.end();
  };

  // Tests from stage k on, as sets of relative paths.
  std::function<std::vector<std::vector<std::vector<SGSymbol>>>(std::size_t)> tests_from =
      [&](std::size_t k) {
        std::vector<std::vector<std::vector<SGSymbol>>> out_tests;
        auto next = k + 1 < plan.stages.size() ? tests_from(k + 1)
                                               : std::vector<std::vector<std::vector<SGSymbol>>>{};
        for (const auto& t : detail::stage_tests(plan.stages[k], k)) {
          std::vector<std::vector<std::vector<std::vector<SGSymbol>>>> options;
          for (const auto& s : t) {
            std::vector<std::vector<std::vector<SGSymbol>>> opts{{{s}}};
            if (!blocked(s))
              for (const auto& cont : next) {
                std::vector<std::vector<SGSymbol>> ext;
                for (const auto& p : cont) {
                  std::vector<SGSymbol> q{s};
                  q.insert(q.end(), p.begin(), p.end());
                  ext.push_back(std::move(q));
                }
                opts.push_back(std::move(ext));
              }
            options.push_back(std::move(opts));
          }
          std::vector<std::size_t> sizes;
          for (const auto& o : options) sizes.push_back(o.size());
          std::vector<std::size_t> idx(options.size(), 0);
          for (;;) {
            std::vector<std::vector<SGSymbol>> test;
            for (std::size_t i = 0; i < options.size(); ++i)
              test.insert(test.end(), options[i][idx[i]].begin(), options[i][idx[i]].end());
            out_tests.push_back(std::move(test));
            std::size_t i = 0;
            while (i < idx.size() && ++idx[i] == sizes[i]) idx[i++] = 0;
            if (i == idx.size()) break;
          }
        }
        return out_tests;
      };

  std::vector<OutcomeSet> tests;
  for (const auto& t : tests_from(0)) {
    OutcomeSet ids_t;
    for (const auto& p : t) ids_t.push_back(intern(p));
    tests.push_back(normalized(std::move(ids_t)));
  }
  std::vector<std::string> labels;
  for (const auto& p : out.paths) labels.push_back(detail::path_label(p));

  Weight w;
  for (const auto& p : out.paths) {
    Vec v = initial;
    for (const auto& s : p) {
      const Basis& b = plan.stages[s.stage].bases[s.basis];
      Vec proj(plan.dim, 0);
      for (auto i : s.members) {
        Amplitude c = inner(b.vectors[i], v);
        for (std::size_t d = 0; d < plan.dim; ++d) proj[d] += c * b.vectors[i][d];
      }
      v = std::move(proj);
    }
    w.push_back(Rational(norm2(v)));
  }
  // Zero-probability paths are physical here (orthogonal continuations), so the
  // positivity requirement of Model is not imposed.
  TestSpace ts(std::move(labels), std::move(tests));
  const ScalarConfig sc{ScalarKind::Float, kQuantumTau};
  if (!is_probability_weight(ts, w, sc)) throw Error(ErrorCode::NotAState, "path probabilities do not sum to 1");
  out.model = Model::trusted(std::move(ts), StateSpace::of({w}), sc);

  const auto& first = plan.stages.front();
  for (const auto& g : first.groups) {
    Event a;
    for (auto i : g.members) a.push_back(ids.at({SGSymbol{0, g.basis, {i}, first.bases[g.basis].labels[i]}}));
    Oid q = ids.at({SGSymbol{0, g.basis, g.members, g.label}});
    if (a.size() >= 2) out.sigma.emplace_back(normalized(std::move(a)), q);
  }
  if (plan.stages.size() > 1) {
    const auto& second = plan.stages[1];
    for (std::size_t b = 0; b < second.bases.size(); ++b)
      for (std::size_t i = 0; i < second.bases[b].vectors.size(); ++i)
        out.continuations.push_back({1, b, {i}, second.bases[b].labels[i]});
  }
  return out;
}

/// σ(a)·y against x·y for the first-stage groups of an SG model.
inline InterferenceData sg_interference(const SGModel& m) {
  InterferenceData d;
  d.ts = &m.model.ts();
  d.scalar = m.model.scalar();
  d.states = m.model.omega().generators;
  d.sigma = m.sigma;
  for (const auto& c : m.continuations) d.continuations.push_back(c.label);
  d.compound = [&m](Oid x, std::size_t y) -> std::optional<Oid> {
    auto p = m.paths.at(x);
    p.push_back(m.continuations.at(y));
    return m.find(p);
  };
  return d;
}

/// Coherent value |⟨y|P_aψ⟩|² and incoherent value Σ_{x∈a}|⟨x|ψ⟩|²|⟨y|x⟩|², from amplitudes.
inline std::pair<double, double> sg_amplitude_values(const Basis& first, const std::vector<std::size_t>& group,
                                                     const Vec& y, const Vec& psi) {
  Vec proj(psi.size(), 0);
  double inc = 0;
  for (auto i : group) {
    Amplitude c = inner(first.vectors[i], psi);
    for (std::size_t d = 0; d < psi.size(); ++d) proj[d] += c * first.vectors[i][d];
    inc += std::norm(c) * std::norm(inner(y, first.vectors[i]));
  }
  return {std::norm(inner(y, proj)), inc};
}

// ---------------------------------------------------------------------------
// Presets

namespace detail {

inline Vec unit_vec(std::size_t dim, std::size_t i) {
  Vec v(dim, 0);
  v[i] = 1;
  return v;
}

/// Columns of a real rotation table as a labeled basis; the table must be orthogonal.
inline Basis basis_from_columns(const std::vector<std::vector<double>>& table, std::vector<std::string> labels) {
  Basis b{std::move(labels), {}};
  for (std::size_t c = 0; c < table.size(); ++c) {
    Vec v;
    for (const auto& row : table) v.push_back(row.at(c));
    b.vectors.push_back(std::move(v));
  }
  check_orthonormal(b, table.size());
  return b;
}

inline Basis standard_basis(std::vector<std::string> labels) {
  Basis b{std::move(labels), {}};
  for (std::size_t i = 0; i < b.labels.size(); ++i) b.vectors.push_back(unit_vec(b.labels.size(), i));
  return b;
}

}  // namespace detail

/// d¹(π/2): rows m' = +1,0,−1, columns m.
inline const std::vector<std::vector<double>>& spin1_rotation_half_pi() {
  static const double h = 0.5, r = 0.70710678118654752;
  static const std::vector<std::vector<double>> t{{h, -r, h}, {r, 0.0, -r}, {h, r, h}};
  return t;
}

/// d^{3/2}(π/2): rows m' = 3/2,1/2,−1/2,−3/2, columns m.
inline const std::vector<std::vector<double>>& spin32_rotation_half_pi() {
  static const double a = 0.35355339059327376, b = 0.61237243569579452;
  static const std::vector<std::vector<double>> t{
      {a, -b, b, -a}, {b, -a, -a, b}, {b, a, -a, -b}, {a, b, b, a}};
  return t;
}

struct SGPreset {
  SGPlan plan;
  Vec initial;
};

/**
 * @brief Named two-stage interferometers.
 *
 * qubit-mz: z-basis {0,1} recombined to q, then the x-basis {+,-}, from (|0⟩+|1⟩)/√2.
 * spin1:    S_z outcomes x,y,z with {x,y} recombined to q, then S_z rotated by π/2
 *           with outcomes u,v,w, from the uniform superposition.
 * spin32:   four S_z beams x,y,z,b with b blocked and {x,y} recombined to q, then the
 *           π/2-rotated basis u,v,w,s, from the uniform superposition.
 */
inline SGPreset sg_preset(const std::string& name) {
  const double r2 = 0.70710678118654752;
  if (name == "qubit-mz") {
    SGPlan p{2, {}};
    p.stages.push_back({{detail::standard_basis({"0", "1"})}, {{0, {0, 1}, "q"}}, {}});
    p.stages.push_back({{Basis{{"+", "-"}, {{r2, r2}, {r2, -r2}}}}, {}, {}});
    return {p, {r2, r2}};
  }
  if (name == "spin1") {
    SGPlan p{3, {}};
    p.stages.push_back({{detail::standard_basis({"x", "y", "z"})}, {{0, {0, 1}, "q"}}, {}});
    p.stages.push_back({{detail::basis_from_columns(spin1_rotation_half_pi(), {"u", "v", "w"})}, {}, {}});
    const double s = 1.0 / std::sqrt(3.0);
    return {p, {s, s, s}};
  }
  if (name == "spin32") {
    SGPlan p{4, {}};
    p.stages.push_back({{detail::standard_basis({"x", "y", "z", "b"})}, {{0, {0, 1}, "q"}}, {"b"}});
    p.stages.push_back({{detail::basis_from_columns(spin32_rotation_half_pi(), {"u", "v", "w", "s"})}, {}, {}});
    return {p, {0.5, 0.5, 0.5, 0.5}};
  }
  throw Error(ErrorCode::UnknownName, "no preset named " + name);
}

inline const std::vector<std::string>& sg_preset_names() {
  static const std::vector<std::string> n{"qubit-mz", "spin1", "spin32"};
  return n;
}

}  // namespace orthokit
