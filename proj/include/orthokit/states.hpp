#pragma once

#include <random>
#include <string>
#include <vector>

#include "orthokit/lp.hpp"
#include "orthokit/testspace.hpp"

namespace orthokit {

enum class ScalarKind { Exact, Float };

struct ScalarConfig {
  ScalarKind kind = ScalarKind::Exact;
  double tau = 1e-9;

  bool eq(const Rational& a, const Rational& b) const {
    if (kind == ScalarKind::Exact) return a == b;
    return abs(Rational(a - b)) <= Rational(tau);
  }
  bool positive(const Rational& a) const {
    return kind == ScalarKind::Exact ? sgn(a) > 0 : a > Rational(tau);
  }
  bool nonnegative(const Rational& a) const {
    return kind == ScalarKind::Exact ? sgn(a) >= 0 : a >= Rational(-tau);
  }
};

/// Outcome-indexed values.
using Weight = std::vector<Rational>;

inline Rational weight_of_event(const Weight& w, const Event& a) {
  Rational s = 0;
  for (Oid x : a) s += w.at(x);
  return s;
}

inline bool is_probability_weight(const TestSpace& ts, const Weight& w,
                                  const ScalarConfig& sc = {}) {
  if (w.size() != ts.size()) return false;
  for (const auto& v : w)
    if (!sc.nonnegative(v) || !sc.nonnegative(Rational(1 - v))) return false;
  for (const auto& t : ts.tests())
    if (!sc.eq(weight_of_event(w, t), 1)) return false;
  return true;
}

struct StateSpace {
  enum class Kind { Full, Generators };
  Kind kind = Kind::Full;
  std::vector<Weight> generators;

  static StateSpace full() { return {}; }
  static StateSpace of(std::vector<Weight> gens) {
    return StateSpace{Kind::Generators, std::move(gens)};
  }
  bool is_full() const { return kind == Kind::Full; }
};

/// A term-list linear constraint over outcome values, used as an LP side condition.
struct SideConstraint {
  std::vector<std::pair<Oid, Rational>> terms;
  Rel rel = Rel::Eq;
  Rational rhs;
};

class Model;

namespace detail {

/// Rows of the weight polytope, reduced to an independent subset by floating elimination.
inline std::vector<std::size_t> independent_test_rows(const TestSpace& ts) {
  const std::size_t n = ts.size();
  std::vector<std::vector<double>> basis;  // echelon rows
  std::vector<std::size_t> pivots;
  std::vector<std::size_t> chosen;
  for (std::size_t t = 0; t < ts.test_count() && chosen.size() < n; ++t) {
    std::vector<double> row(n, 0.0);
    for (Oid x : ts.test(t)) row[x] = 1.0;
    for (std::size_t k = 0; k < basis.size(); ++k) {
      double f = row[pivots[k]];
      if (f != 0.0)
        for (std::size_t j = 0; j < n; ++j) row[j] -= f * basis[k][j];
    }
    std::size_t piv = n;
    double best = 1e-9;
    for (std::size_t j = 0; j < n; ++j)
      if (std::fabs(row[j]) > best) {
        best = std::fabs(row[j]);
        piv = j;
      }
    if (piv == n) continue;
    double p = row[piv];
    for (auto& v : row) v /= p;
    basis.push_back(std::move(row));
    pivots.push_back(piv);
    chosen.push_back(t);
  }
  return chosen;
}

}  // namespace detail

/**
 * @brief A test space with a state space and scalar configuration.
 *
 * Positivity (every outcome has positive probability in some state) is checked
 * at construction.
 */
class Model {
 public:
  Model() = default;
  Model(TestSpace ts, StateSpace omega, ScalarConfig scalar = {})
      : ts_(std::move(ts)), omega_(std::move(omega)), scalar_(scalar) {
    for (const auto& g : omega_.generators) {
      if (!is_probability_weight(ts_, g, scalar_))
        throw Error(ErrorCode::NotAState, "generator is not a probability weight");
    }
    if (!omega_.is_full() && omega_.generators.empty())
      throw Error(ErrorCode::NotAState, "empty generator list");
    auto pos = possibly_positive({});
    if (!pos)
      throw Error(ErrorCode::PositivityViolation, "no probability weights exist");
    for (Oid x = 0; x < ts_.size(); ++x)
      if (!pos->test(x))
        throw Error(ErrorCode::PositivityViolation,
                    "outcome '" + ts_.label(x) + "' has probability 0 in every state");
  }

  static Model full(TestSpace ts) { return Model(std::move(ts), StateSpace::full()); }

  /// Skips the positivity LP; for constructions whose positivity follows from their inputs.
  static Model trusted(TestSpace ts, StateSpace omega, ScalarConfig scalar = {}) {
    Model m;
    m.ts_ = std::move(ts);
    m.omega_ = std::move(omega);
    m.scalar_ = scalar;
    return m;
  }

  const TestSpace& ts() const { return ts_; }
  const StateSpace& omega() const { return omega_; }
  const ScalarConfig& scalar() const { return scalar_; }

  /**
   * @brief Optimizes objective·α over α ∈ Ω subject to side constraints.
   * @return nullopt when infeasible; otherwise value and an optimal α.
   */
  std::optional<std::pair<Rational, Weight>> optimize(const Weight& objective,
                                                      const std::vector<SideConstraint>& side,
                                                      bool maximize) const {
    return omega_.is_full() ? optimize_full(objective, side, maximize)
                            : optimize_generators(objective, side, maximize);
  }

  /**
   * @brief Outcomes that are positive in some state satisfying the side constraints.
   *
   * Repeatedly maximizes the total mass on outcomes not yet seen positive.
   */
  std::optional<Bits> possibly_positive(const std::vector<SideConstraint>& side) const {
    const std::size_t n = ts_.size();
    Bits found(n);
    bool first = true;
    for (;;) {
      Weight obj(n, 0);
      bool any = false;
      for (Oid x = 0; x < n; ++x)
        if (!found.test(x)) {
          obj[x] = 1;
          any = true;
        }
      if (!any && !first) return found;
      auto r = optimize(obj, side, true);
      if (!r) return std::nullopt;
      first = false;
      if (!any || !scalar_.positive(r->first)) return found;
      bool grew = false;
      for (Oid x = 0; x < n; ++x)
        if (!found.test(x) && scalar_.positive(r->second[x])) {
          found.set(x);
          grew = true;
        }
      if (!grew) return found;
    }
  }

 private:
  std::optional<std::pair<Rational, Weight>> optimize_full(const Weight& objective,
                                                           const std::vector<SideConstraint>& side,
                                                           bool maximize) const {
    const std::size_t n = ts_.size();
    LinearProgram lp;
    lp.vars = n;
    lp.objective = objective;
    lp.maximize = maximize;
    auto test_row = [&](std::size_t t) {
      LinearConstraint c;
      c.coef.assign(n, 0);
      for (Oid x : ts_.test(t)) c.coef[x] = 1;
      c.rel = Rel::Eq;
      c.rhs = 1;
      return c;
    };
    std::vector<bool> used(ts_.test_count(), false);
    for (std::size_t t : detail::independent_test_rows(ts_)) {
      lp.rows.push_back(test_row(t));
      used[t] = true;
    }
    for (const auto& s : side) {
      LinearConstraint c;
      c.coef.assign(n, 0);
      for (const auto& [x, v] : s.terms) c.coef[x] += v;
      c.rel = s.rel;
      c.rhs = s.rhs;
      lp.rows.push_back(std::move(c));
    }
    // Lazy rows: re-solve with any violated test equation added.
    for (;;) {
      auto sol = solve_lp(lp);
      if (sol.status == LpSolution::Status::Infeasible) return std::nullopt;
      if (sol.status == LpSolution::Status::Unbounded)
        throw Error(ErrorCode::LawViolation, "weight polytope LP unbounded");
      bool added = false;
      for (std::size_t t = 0; t < ts_.test_count(); ++t) {
        if (used[t]) continue;
        if (weight_of_event(sol.x, ts_.test(t)) != 1) {
          lp.rows.push_back(test_row(t));
          used[t] = true;
          added = true;
        }
      }
      if (!added) return std::make_pair(sol.value, sol.x);
    }
  }

  std::optional<std::pair<Rational, Weight>> optimize_generators(
      const Weight& objective, const std::vector<SideConstraint>& side, bool maximize) const {
    const auto& gens = omega_.generators;
    const std::size_t k = gens.size();
    LinearProgram lp;
    lp.vars = k;
    lp.maximize = maximize;
    lp.objective.assign(k, 0);
    for (std::size_t i = 0; i < k; ++i)
      for (Oid x = 0; x < ts_.size(); ++x)
        if (sgn(objective[x]) != 0) lp.objective[i] += objective[x] * gens[i][x];
    LinearConstraint sum;
    sum.coef.assign(k, 1);
    sum.rel = Rel::Eq;
    sum.rhs = 1;
    lp.rows.push_back(sum);
    const Rational tau(scalar_.tau);
    for (const auto& s : side) {
      LinearConstraint c;
      c.coef.assign(k, 0);
      for (std::size_t i = 0; i < k; ++i)
        for (const auto& [x, v] : s.terms) c.coef[i] += v * gens[i][x];
      if (scalar_.kind == ScalarKind::Float && s.rel == Rel::Eq) {
        LinearConstraint lo = c, hi = c;
        lo.rel = Rel::Ge;
        lo.rhs = s.rhs - tau;
        hi.rel = Rel::Le;
        hi.rhs = s.rhs + tau;
        lp.rows.push_back(std::move(lo));
        lp.rows.push_back(std::move(hi));
      } else {
        c.rel = s.rel;
        c.rhs = s.rhs;
        lp.rows.push_back(std::move(c));
      }
    }
    auto sol = solve_lp(lp);
    if (sol.status != LpSolution::Status::Optimal) return std::nullopt;
    Weight w(ts_.size(), 0);
    for (std::size_t i = 0; i < k; ++i)
      if (sgn(sol.x[i]) != 0)
        for (Oid x = 0; x < ts_.size(); ++x) w[x] += sol.x[i] * gens[i][x];
    return std::make_pair(sol.value, w);
  }

  TestSpace ts_;
  StateSpace omega_;
  ScalarConfig scalar_;
};

// ---------------------------------------------------------------------------
// Membership

inline bool contains_state(const Model& m, const Weight& w) {
  if (m.omega().is_full()) return is_probability_weight(m.ts(), w, m.scalar());
  if (!is_probability_weight(m.ts(), w, m.scalar())) return false;
  std::vector<SideConstraint> side;
  for (Oid x = 0; x < m.ts().size(); ++x) side.push_back({{{x, 1}}, Rel::Eq, w[x]});
  return m.optimize(Weight(m.ts().size(), 0), side, true).has_value();
}

/// Is ω a nonnegative multiple of a state?
inline bool contains_ray(const Model& m, const Weight& w) {
  const auto& sc = m.scalar();
  if (w.size() != m.ts().size()) return false;
  for (const auto& v : w)
    if (!sc.nonnegative(v)) return false;
  Rational total = weight_of_event(w, m.ts().test(0));
  for (const auto& t : m.ts().tests())
    if (!sc.eq(weight_of_event(w, t), total)) return false;
  if (sc.eq(total, 0)) {
    for (const auto& v : w)
      if (!sc.eq(v, 0)) return false;
    return true;
  }
  if (m.omega().is_full()) return true;
  Weight scaled = w;
  for (auto& v : scaled) v /= total;
  return contains_state(m, scaled);
}

// ---------------------------------------------------------------------------
// State-dependent predicates

struct OutcomeReport {
  bool holds = true;
  std::vector<Oid> failing;  // outcomes violating the predicate
};

struct PairReport {
  bool holds = true;
  std::vector<std::pair<Oid, Oid>> failing;
};

inline OutcomeReport check_positive(const Model& m) {
  OutcomeReport r;
  auto pos = m.possibly_positive({});
  for (Oid x = 0; x < m.ts().size(); ++x)
    if (!pos || !pos->test(x)) r.failing.push_back(x);
  r.holds = r.failing.empty();
  return r;
}

/// Largest value of α(x) over Ω.
inline Rational max_value(const Model& m, Oid x) {
  if (!m.omega().is_full()) {
    Rational best = m.omega().generators.front()[x];
    for (const auto& g : m.omega().generators) best = std::max(best, g[x]);
    return best;
  }
  Weight obj(m.ts().size(), 0);
  obj[x] = 1;
  auto r = m.optimize(obj, {}, true);
  return r ? r->first : Rational(0);
}

inline OutcomeReport check_unital(const Model& m) {
  OutcomeReport r;
  for (Oid x = 0; x < m.ts().size(); ++x)
    if (!m.scalar().eq(max_value(m, x), 1)) r.failing.push_back(x);
  r.holds = r.failing.empty();
  return r;
}

/**
 * @brief For all non-orthogonal x, y: some state has α(x) = 1 and α(y) > 0.
 *
 * x = y is included, so strong unitality implies unitality. Restricted to distinct pairs
 * the condition holds vacuously on {a,b},{a,c},{b,c}, which has no state with α(a) = 1 and
 * is not regular.
 */
inline PairReport check_strongly_unital(const Model& m, std::size_t cap = default_cap()) {
  PairReport r;
  const auto& ts = m.ts();
  check_cap(ts.size() * ts.size(), cap, "strong-unitality pair set");
  for (Oid x = 0; x < ts.size(); ++x) {
    Bits pos(ts.size());
    if (!m.omega().is_full()) {
      for (const auto& g : m.omega().generators) {
        if (!m.scalar().eq(g[x], 1)) continue;
        for (Oid y = 0; y < ts.size(); ++y)
          if (m.scalar().positive(g[y])) pos.set(y);
      }
    } else {
      auto p = m.possibly_positive({SideConstraint{{{x, 1}}, Rel::Eq, 1}});
      if (p) pos = *p;
    }
    for (Oid y = 0; y < ts.size(); ++y) {
      if (ts.orthogonal(x, y)) continue;
      if (!pos.test(y)) r.failing.emplace_back(x, y);
    }
  }
  r.holds = r.failing.empty();
  return r;
}

/**
 * @brief If α(a) = 1 for every state then a must be a test.
 * @return whether the hypothesis held; throws PositivityViolation if it held for a non-test.
 */
inline bool lemma0_check(const Model& m, const Event& a) {
  Weight obj(m.ts().size(), 0);
  for (Oid x : a) obj[x] = 1;
  Rational lo;
  if (!m.omega().is_full()) {
    lo = weight_of_event(m.omega().generators.front(), a);
    for (const auto& g : m.omega().generators) lo = std::min(lo, weight_of_event(g, a));
  } else {
    auto r = m.optimize(obj, {}, false);
    lo = r ? r->first : Rational(0);
  }
  bool hyp = m.scalar().eq(lo, 1);
  if (hyp && !m.ts().is_test(a))
    throw Error(ErrorCode::PositivityViolation,
                "every state gives probability 1 to the non-test " + m.ts().format(a));
  return hyp;
}

// ---------------------------------------------------------------------------
// Vertices of the full weight polytope

struct VertexEnumeration {
  std::vector<Weight> vertices;
  bool complete = true;  // false when a cap stopped the search
};

/**
 * @brief Vertices of Pr(ℳ) by depth-first search over supports with independent columns.
 *
 * A vertex is the unique solution supported on an independent column set, when positive.
 * Columns are eliminated incrementally against a row basis of the test equations.
 */
inline VertexEnumeration enumerate_vertices(const TestSpace& ts, std::size_t vertex_cap = 10000,
                                            std::size_t node_cap = 200000) {
  const std::size_t n = ts.size();
  const auto rows = detail::independent_test_rows(ts);
  const std::size_t r = rows.size();
  VertexEnumeration out;
  std::size_t nodes = 0;

  struct Column {
    Oid outcome;
    std::vector<Rational> reduced;  // zero at the pivots of earlier columns
    std::size_t pivot;
    std::vector<Rational> combo;    // reduced = Σ combo[j]·(column of support[j])
  };
  std::vector<Column> basis;

  auto raw = [&](Oid x) {
    std::vector<Rational> c(r, 0);
    for (std::size_t i = 0; i < r; ++i)
      if (ts.test_bits(rows[i]).test(x)) c[i] = 1;
    return c;
  };

  auto push = [&](Oid x) -> bool {
    Column col{x, raw(x), r, std::vector<Rational>(basis.size() + 1, 0)};
    col.combo.back() = 1;
    for (std::size_t k = 0; k < basis.size(); ++k) {
      Rational f = col.reduced[basis[k].pivot];
      if (sgn(f) == 0) continue;
      f /= basis[k].reduced[basis[k].pivot];
      for (std::size_t i = 0; i < r; ++i) col.reduced[i] -= f * basis[k].reduced[i];
      for (std::size_t j = 0; j < basis[k].combo.size(); ++j) col.combo[j] -= f * basis[k].combo[j];
    }
    for (std::size_t i = 0; i < r; ++i)
      if (sgn(col.reduced[i]) != 0) {
        col.pivot = i;
        break;
      }
    if (col.pivot == r) return false;
    basis.push_back(std::move(col));
    return true;
  };

  // Consistent supports end the branch: an independent superset has the same solution.
  enum class Solve { Inconsistent, NotPositive, Vertex };
  Weight found;
  auto solve = [&]() -> Solve {
    std::vector<Rational> b(r, 1);
    std::vector<Rational> coef(basis.size(), 0);
    for (std::size_t k = 0; k < basis.size(); ++k) {
      Rational lambda = b[basis[k].pivot] / basis[k].reduced[basis[k].pivot];
      if (sgn(lambda) == 0) continue;
      for (std::size_t i = 0; i < r; ++i) b[i] -= lambda * basis[k].reduced[i];
      for (std::size_t j = 0; j < basis[k].combo.size(); ++j) coef[j] += lambda * basis[k].combo[j];
    }
    for (const auto& v : b)
      if (sgn(v) != 0) return Solve::Inconsistent;
    found.assign(n, 0);
    for (std::size_t j = 0; j < basis.size(); ++j) {
      if (sgn(coef[j]) <= 0) return Solve::NotPositive;
      found[basis[j].outcome] = coef[j];
    }
    return Solve::Vertex;
  };

  // last[t]: largest outcome of test t; hits[t]: support members in t.
  std::vector<Oid> last(ts.test_count(), 0);
  for (std::size_t t = 0; t < ts.test_count(); ++t) last[t] = ts.test(t).back();
  std::vector<std::size_t> hits(ts.test_count(), 0);
  auto coverable = [&](Oid next) {
    for (std::size_t t = 0; t < last.size(); ++t)
      if (hits[t] == 0 && last[t] < next) return false;
    return true;
  };

  std::function<void(Oid)> dfs = [&](Oid start) {
    for (Oid x = start; x < n; ++x) {
      if (!out.complete) return;
      if (++nodes > node_cap) {
        out.complete = false;
        return;
      }
      // Skipping x past the end of an unhit test leaves it uncoverable.
      if (!coverable(x)) return;
      if (!push(x)) continue;
      for (std::size_t t : ts.tests_containing(x)) ++hits[t];
      Solve st = solve();
      if (st == Solve::Vertex) {
        for (const auto& t : ts.tests())
          if (weight_of_event(found, t) != 1)
            throw Error(ErrorCode::LawViolation, "row basis of the test equations is inexact");
        out.vertices.push_back(found);
        if (out.vertices.size() > vertex_cap) out.complete = false;
      } else if (st == Solve::Inconsistent && basis.size() < r) {
        dfs(x + 1);
      }
      for (std::size_t t : ts.tests_containing(x)) --hits[t];
      basis.pop_back();
    }
  };
  dfs(0);
  std::sort(out.vertices.begin(), out.vertices.end());
  return out;
}

/// Seeded sample of polytope points: LP optima of random objectives and their midpoints.
inline std::vector<Weight> sample_states(const Model& m, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> coef(-50, 50);
  std::vector<Weight> out;
  for (std::size_t i = 0; i < count; ++i) {
    Weight obj(m.ts().size());
    for (auto& v : obj) v = coef(rng);
    auto r = m.optimize(obj, {}, true);
    if (!r) break;
    out.push_back(r->second);
  }
  const std::size_t base = out.size();
  for (std::size_t i = 1; i < base; ++i) {
    Weight mid(m.ts().size());
    for (std::size_t x = 0; x < mid.size(); ++x) mid[x] = (out[i - 1][x] + out[i][x]) / 2;
    out.push_back(std::move(mid));
  }
  return out;
}

/// Generators of Ω: the listed ones, or vertices of the full polytope.
inline std::optional<std::vector<Weight>> state_generators(const Model& m,
                                                           std::size_t vertex_cap = 10000) {
  if (!m.omega().is_full()) return m.omega().generators;
  auto v = enumerate_vertices(m.ts(), vertex_cap);
  if (!v.complete) return std::nullopt;
  return v.vertices;
}

}  // namespace orthokit
