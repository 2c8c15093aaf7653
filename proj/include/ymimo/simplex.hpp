#pragma once

// Primal simplex over exact rationals with Bland's rule.
//
//   maximize c^T x  subject to  A x <= b,  x >= 0,  with b >= 0.
//
// b >= 0 makes the slack basis feasible, so no phase one is needed; every
// LP built by the region tools has this form. Bland's rule (smallest
// eligible index enters, smallest basic index leaves on ties) guarantees
// termination on degenerate problems.

#include <string>
#include <vector>

#include "ymimo/dof_vector.hpp"
#include "ymimo/error.hpp"

namespace ymimo {

struct LinearProgram {
  std::vector<std::vector<Rational>> a;  // m rows of n coefficients
  std::vector<Rational> b;               // m, all >= 0
  std::vector<Rational> c;               // n

  std::size_t rows() const { return b.size(); }
  std::size_t cols() const { return c.size(); }
};

enum class LpStatus { kOptimal, kUnbounded };

struct LpSolution {
  LpStatus status = LpStatus::kOptimal;
  Rational objective = 0;
  std::vector<Rational> x;     // primal, n entries
  std::vector<Rational> dual;  // y, m entries, y >= 0 and A^T y >= c at the optimum
  // Basic variable of each tableau row; indices >= n denote slacks (n + row).
  std::vector<std::size_t> basis;
  int pivots = 0;
};

// Re-verifies an optimality certificate by substitution: primal feasibility,
// dual feasibility and equal objective values. Exact, no tolerance.
inline bool verify_certificate(const LinearProgram& lp, const LpSolution& sol, std::string* why = nullptr) {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  if (sol.status != LpStatus::kOptimal) return fail("not optimal");
  if (sol.x.size() != lp.cols() || sol.dual.size() != lp.rows()) return fail("size mismatch");
  for (const auto& xi : sol.x)
    if (xi < 0) return fail("x has a negative entry");
  Rational primal = 0;
  for (std::size_t j = 0; j < lp.cols(); ++j) primal += lp.c[j] * sol.x[j];
  if (primal != sol.objective) return fail("objective does not match c^T x");
  for (std::size_t i = 0; i < lp.rows(); ++i) {
    Rational lhs = 0;
    for (std::size_t j = 0; j < lp.cols(); ++j) lhs += lp.a[i][j] * sol.x[j];
    if (lhs > lp.b[i]) return fail("row " + std::to_string(i) + " violated");
    if (sol.dual[i] < 0) return fail("negative dual entry");
  }
  Rational dual_obj = 0;
  for (std::size_t i = 0; i < lp.rows(); ++i) dual_obj += lp.b[i] * sol.dual[i];
  if (dual_obj != sol.objective) return fail("duality gap is nonzero");
  for (std::size_t j = 0; j < lp.cols(); ++j) {
    Rational col = 0;
    for (std::size_t i = 0; i < lp.rows(); ++i) col += lp.a[i][j] * sol.dual[i];
    if (col < lp.c[j]) return fail("dual constraint " + std::to_string(j) + " violated");
  }
  return true;
}

inline LpSolution solve_lp(const LinearProgram& lp) {
  const std::size_t m = lp.rows();
  const std::size_t n = lp.cols();
  if (lp.a.size() != m) throw DimensionError("solve_lp: A and b disagree on row count");
  for (const auto& row : lp.a)
    if (row.size() != n) throw DimensionError("solve_lp: ragged constraint matrix");
  for (const auto& bi : lp.b)
    if (bi < 0) throw InvalidInput("solve_lp: right-hand side must be nonnegative");

  // Tableau columns: n structural, m slack, then the right-hand side.
  const std::size_t width = n + m + 1;
  std::vector<std::vector<Rational>> t(m, std::vector<Rational>(width, Rational(0)));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) t[i][j] = lp.a[i][j];
    t[i][n + i] = 1;
    t[i][n + m] = lp.b[i];
  }
  // Reduced costs c_j - z_j; the objective value sits in the last column, negated.
  std::vector<Rational> reduced(width, Rational(0));
  for (std::size_t j = 0; j < n; ++j) reduced[j] = lp.c[j];

  LpSolution sol;
  sol.basis.resize(m);
  for (std::size_t i = 0; i < m; ++i) sol.basis[i] = n + i;

  for (;;) {
    std::size_t enter = width;
    for (std::size_t j = 0; j + 1 < width; ++j) {
      if (reduced[j] > 0) {
        enter = j;
        break;
      }
    }
    if (enter == width) break;

    std::size_t leave = m;
    Rational best_ratio;
    for (std::size_t i = 0; i < m; ++i) {
      if (t[i][enter] <= 0) continue;
      Rational ratio = t[i][n + m] / t[i][enter];
      if (leave == m || ratio < best_ratio || (ratio == best_ratio && sol.basis[i] < sol.basis[leave])) {
        leave = i;
        best_ratio = std::move(ratio);
      }
    }
    if (leave == m) {
      sol.status = LpStatus::kUnbounded;
      return sol;
    }

    const Rational pivot = t[leave][enter];
    for (auto& v : t[leave]) {
      if (v != 0) v /= pivot;
    }
    for (std::size_t i = 0; i < m; ++i) {
      if (i == leave || t[i][enter] == 0) continue;
      const Rational factor = t[i][enter];
      for (std::size_t j = 0; j < width; ++j)
        if (t[leave][j] != 0) t[i][j] -= factor * t[leave][j];
    }
    if (reduced[enter] != 0) {
      const Rational factor = reduced[enter];
      for (std::size_t j = 0; j < width; ++j)
        if (t[leave][j] != 0) reduced[j] -= factor * t[leave][j];
    }
    sol.basis[leave] = enter;
    ++sol.pivots;
  }

  sol.x.assign(n, Rational(0));
  for (std::size_t i = 0; i < m; ++i)
    if (sol.basis[i] < n) sol.x[sol.basis[i]] = t[i][n + m];
  sol.objective = -reduced[n + m];
  // Dual values are the negated reduced costs of the slack columns.
  sol.dual.assign(m, Rational(0));
  for (std::size_t i = 0; i < m; ++i) sol.dual[i] = -reduced[n + i];

  std::string why;
  if (!verify_certificate(lp, sol, &why)) throw Error("solve_lp: certificate check failed: " + why);
  return sol;
}

}  // namespace ymimo
