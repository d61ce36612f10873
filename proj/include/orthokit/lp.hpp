#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "orthokit/common.hpp"

namespace orthokit {

using Rational = mpq_class;

enum class Rel { Le, Eq, Ge };

struct LinearConstraint {
  std::vector<Rational> coef;
  Rel rel = Rel::Eq;
  Rational rhs;
};

/// max (or min) objective·x subject to rows, x ≥ 0.
struct LinearProgram {
  std::size_t vars = 0;
  std::vector<LinearConstraint> rows;
  std::vector<Rational> objective;
  bool maximize = true;
};

struct LpSolution {
  enum class Status { Optimal, Infeasible, Unbounded };
  Status status = Status::Infeasible;
  Rational value;
  std::vector<Rational> x;

  bool optimal() const { return status == Status::Optimal; }
};

namespace detail {

/// Dense two-phase simplex over exact rationals with Bland's rule.
class Simplex {
 public:
  explicit Simplex(const LinearProgram& lp) : lp_(lp) {}

  LpSolution run() {
    build();
    LpSolution out;
    // Phase 1: maximize -(sum of artificials).
    if (n_art_ > 0) {
      std::vector<Rational> c1(cols_, 0);
      for (std::size_t j = art_begin_; j < cols_; ++j) c1[j] = -1;
      set_objective(c1);
      if (!optimize(/*allow_art=*/true)) {
        out.status = LpSolution::Status::Unbounded;  // cannot happen for phase 1
        return out;
      }
      if (sgn(obj_[cols_]) != 0) {
        out.status = LpSolution::Status::Infeasible;
        return out;
      }
      drive_out_artificials();
    }
    std::vector<Rational> c2(cols_, 0);
    for (std::size_t j = 0; j < lp_.vars; ++j)
      c2[j] = lp_.maximize ? lp_.objective[j] : Rational(-lp_.objective[j]);
    set_objective(c2);
    if (!optimize(/*allow_art=*/false)) {
      out.status = LpSolution::Status::Unbounded;
      return out;
    }
    out.status = LpSolution::Status::Optimal;
    out.x.assign(lp_.vars, 0);
    for (std::size_t i = 0; i < rows_; ++i)
      if (basis_[i] < lp_.vars) out.x[basis_[i]] = tab_[i][cols_];
    out.value = 0;
    for (std::size_t j = 0; j < lp_.vars; ++j) out.value += lp_.objective[j] * out.x[j];
    return out;
  }

 private:
  void build() {
    rows_ = lp_.rows.size();
    std::size_t n_slack = 0;
    n_art_ = 0;
    std::vector<Rel> rel(rows_);
    std::vector<bool> flip(rows_, false);
    for (std::size_t i = 0; i < rows_; ++i) {
      rel[i] = lp_.rows[i].rel;
      if (sgn(lp_.rows[i].rhs) < 0) {
        flip[i] = true;
        if (rel[i] == Rel::Le) rel[i] = Rel::Ge;
        else if (rel[i] == Rel::Ge) rel[i] = Rel::Le;
      }
      if (rel[i] != Rel::Eq) ++n_slack;
      if (rel[i] != Rel::Le) ++n_art_;
    }
    slack_begin_ = lp_.vars;
    art_begin_ = slack_begin_ + n_slack;
    cols_ = art_begin_ + n_art_;
    tab_.assign(rows_, std::vector<Rational>(cols_ + 1, 0));
    basis_.assign(rows_, 0);
    std::size_t s = slack_begin_, a = art_begin_;
    for (std::size_t i = 0; i < rows_; ++i) {
      const auto& row = lp_.rows[i];
      for (std::size_t j = 0; j < lp_.vars && j < row.coef.size(); ++j)
        tab_[i][j] = flip[i] ? Rational(-row.coef[j]) : row.coef[j];
      tab_[i][cols_] = flip[i] ? Rational(-row.rhs) : row.rhs;
      if (rel[i] == Rel::Le) {
        tab_[i][s] = 1;
        basis_[i] = s++;
      } else if (rel[i] == Rel::Ge) {
        tab_[i][s++] = -1;
        tab_[i][a] = 1;
        basis_[i] = a++;
      } else {
        tab_[i][a] = 1;
        basis_[i] = a++;
      }
    }
    blocked_.assign(cols_, false);
  }

  void set_objective(const std::vector<Rational>& c) {
    // obj_[j] = c_B B^-1 A_j - c_j ; obj_[cols_] = current value.
    obj_.assign(cols_ + 1, 0);
    for (std::size_t j = 0; j < cols_; ++j) obj_[j] = -c[j];
    for (std::size_t i = 0; i < rows_; ++i) {
      const Rational& cb = c[basis_[i]];
      if (sgn(cb) == 0) continue;
      for (std::size_t j = 0; j <= cols_; ++j)
        if (sgn(tab_[i][j]) != 0) obj_[j] += cb * tab_[i][j];
    }
  }

  bool optimize(bool allow_art) {
    for (;;) {
      std::size_t enter = cols_;
      for (std::size_t j = 0; j < cols_; ++j) {
        if (blocked_[j] || (!allow_art && j >= art_begin_)) continue;
        if (sgn(obj_[j]) < 0) {
          enter = j;
          break;
        }
      }
      if (enter == cols_) return true;
      std::size_t leave = rows_;
      Rational best;
      for (std::size_t i = 0; i < rows_; ++i) {
        if (sgn(tab_[i][enter]) <= 0) continue;
        Rational ratio = tab_[i][cols_] / tab_[i][enter];
        if (leave == rows_ || ratio < best || (ratio == best && basis_[i] < basis_[leave])) {
          best = ratio;
          leave = i;
        }
      }
      if (leave == rows_) return false;
      pivot(leave, enter);
    }
  }

  void pivot(std::size_t r, std::size_t c) {
    Rational p = tab_[r][c];
    for (std::size_t j = 0; j <= cols_; ++j)
      if (sgn(tab_[r][j]) != 0) tab_[r][j] /= p;
    for (std::size_t i = 0; i < rows_; ++i) {
      if (i == r || sgn(tab_[i][c]) == 0) continue;
      Rational f = tab_[i][c];
      for (std::size_t j = 0; j <= cols_; ++j)
        if (sgn(tab_[r][j]) != 0) tab_[i][j] -= f * tab_[r][j];
    }
    if (sgn(obj_[c]) != 0) {
      Rational f = obj_[c];
      for (std::size_t j = 0; j <= cols_; ++j)
        if (sgn(tab_[r][j]) != 0) obj_[j] -= f * tab_[r][j];
    }
    basis_[r] = c;
  }

  void drive_out_artificials() {
    for (std::size_t i = 0; i < rows_;) {
      if (basis_[i] < art_begin_) {
        ++i;
        continue;
      }
      std::size_t col = cols_;
      for (std::size_t j = 0; j < art_begin_; ++j)
        if (sgn(tab_[i][j]) != 0) {
          col = j;
          break;
        }
      if (col != cols_) {
        pivot(i, col);
        ++i;
      } else {
        // Redundant row: drop it.
        tab_.erase(tab_.begin() + static_cast<std::ptrdiff_t>(i));
        basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(i));
        --rows_;
      }
    }
    for (std::size_t j = art_begin_; j < cols_; ++j) blocked_[j] = true;
  }

  const LinearProgram& lp_;
  std::size_t rows_ = 0, cols_ = 0, slack_begin_ = 0, art_begin_ = 0, n_art_ = 0;
  std::vector<std::vector<Rational>> tab_;
  std::vector<Rational> obj_;
  std::vector<std::size_t> basis_;
  std::vector<bool> blocked_;
};

}  // namespace detail

inline LpSolution solve_lp(const LinearProgram& lp) { return detail::Simplex(lp).run(); }

// ---------------------------------------------------------------------------
// Scalars

/// Parses "p/q", an integer, or a decimal literal exactly. Sets *is_decimal for decimals.
inline Rational parse_rational(const std::string& text, bool* is_decimal = nullptr) {
  if (is_decimal) *is_decimal = false;
  if (text.empty()) throw Error(ErrorCode::ParseError, "empty number");
  auto bad = [&] { return Error(ErrorCode::ParseError, "bad number '" + text + "'"); };
  if (text.find('/') != std::string::npos) {
    Rational r;
    if (r.set_str(text, 10) != 0) throw bad();
    if (r.get_den() == 0) throw bad();
    r.canonicalize();
    return r;
  }
  bool decimal = text.find_first_of(".eE") != std::string::npos;
  if (!decimal) {
    mpz_class z;
    if (z.set_str(text, 10) != 0) throw bad();
    return Rational(z);
  }
  if (is_decimal) *is_decimal = true;
  // Decimal literal: value of the nearest double, kept exactly.
  std::size_t used = 0;
  double d = 0;
  try {
    d = std::stod(text, &used);
  } catch (...) {
    throw bad();
  }
  if (used != text.size() || !std::isfinite(d)) throw bad();
  return Rational(d);
}

inline std::string format_rational(const Rational& r) {
  if (r.get_den() == 1) return r.get_num().get_str();
  return r.get_num().get_str() + "/" + r.get_den().get_str();
}

}  // namespace orthokit
