#pragma once

// Complex dense linear algebra and normalized Moore-Penrose pseudo-inverses.
//
// For a wide H (N x M, N <= M) the right inverse H^+ = H^H (H H^H)^{-1}
// satisfies H H^+ = I_N. Scaling it to unit Frobenius norm gives
// H^R = alpha H^+ with alpha^{-2} = tr((H^+)^H H^+), so that H H^R = alpha I_N.
// The tall case D (M x N) mirrors this with D^L D = beta I_N.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <limits>
#include <string>

#include "ymimo/error.hpp"

namespace ymimo {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

namespace tolerance {
// sigma_min / sigma_max below this is treated as rank deficient.
inline constexpr double kRankRatio = 1e-10;
// Gram-matrix condition number above which the SVD route is used instead.
inline constexpr double kGramFallbackCondition = 1e8;
// Residual-correction passes after the Gram solve.
inline constexpr int kRefinementSteps = 2;
// ||H H^R - alpha I||_F <= kDiagonalization * alpha * sqrt(N).
inline constexpr double kDiagonalization = 1e-9;
// |tr((H^R)^H H^R) - 1| <= kUnitNorm.
inline constexpr double kUnitNorm = 1e-12;
// Relative slack allowed by the power-constraint check.
inline constexpr double kPower = 1e-9;
}  // namespace tolerance

// How the normalized pseudo-inverse is scaled. kUnitFrobenius is the textbook
// definition; kPowerMatched multiplies by sqrt(N) so that a white input with
// total power P leaves the precoder with total power P as well.
enum class PowerScaling { kUnitFrobenius, kPowerMatched };

struct NormalizedRightMppi {
  ComplexMatrix matrix;  // M x N
  double alpha = 0.0;
};

struct NormalizedLeftMppi {
  ComplexMatrix matrix;  // N x M
  double beta = 0.0;
};

struct ConditionDiagnostics {
  Eigen::VectorXd singular_values;  // nonincreasing
  double condition = 1.0;           // sigma_max / sigma_min, +inf if singular
};

inline bool all_finite(const ComplexMatrix& a) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const Complex z = a.data()[i];
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  }
  return true;
}

inline ConditionDiagnostics condition_diagnostics(const ComplexMatrix& a) {
  ConditionDiagnostics out;
  if (a.size() == 0) {
    out.singular_values.resize(0);
    return out;
  }
  Eigen::JacobiSVD<ComplexMatrix> svd(a);
  out.singular_values = svd.singularValues();
  const double smax = out.singular_values(0);
  const double smin = out.singular_values(out.singular_values.size() - 1);
  if (smin > 0.0) {
    out.condition = smax / smin;
  } else {
    out.condition = std::numeric_limits<double>::infinity();
  }
  return out;
}

namespace detail {

inline std::string shape(const ComplexMatrix& a) {
  return std::to_string(a.rows()) + "x" + std::to_string(a.cols());
}

// Throws unless `a` is finite and sigma_min/sigma_max >= kRankRatio. Returns
// the singular-value condition number of `a`.
inline double require_full_rank(const ComplexMatrix& a, const char* what) {
  if (!all_finite(a)) throw InvalidInput(std::string(what) + ": non-finite entry");
  const auto diag = condition_diagnostics(a);
  const double smax = diag.singular_values.size() > 0 ? diag.singular_values(0) : 0.0;
  const double ratio = smax > 0.0 ? 1.0 / diag.condition : 0.0;
  if (!(ratio >= tolerance::kRankRatio)) {
    throw RankDeficient(std::string(what) + ": matrix " + shape(a) +
                            " is rank deficient (sigma_min/sigma_max = " +
                            std::to_string(ratio) + ")",
                        ratio);
  }
  return diag.condition;
}

// Moore-Penrose inverse through the SVD. Only reached for full-rank input.
inline ComplexMatrix svd_pseudo_inverse(const ComplexMatrix& a) {
  Eigen::JacobiSVD<ComplexMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd inv = svd.singularValues().cwiseInverse();
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint();
}

}  // namespace detail

// Minimum-norm right inverse of a wide matrix: H (N x M, N <= M) -> M x N.
inline ComplexMatrix right_pseudo_inverse(const ComplexMatrix& h) {
  if (h.rows() == 0 || h.rows() > h.cols()) {
    throw DimensionError("right_pseudo_inverse: need 1 <= N <= M, got " + detail::shape(h));
  }
  const double cond = detail::require_full_rank(h, "right_pseudo_inverse");
  if (cond * cond > tolerance::kGramFallbackCondition) return detail::svd_pseudo_inverse(h);
  const Eigen::LLT<ComplexMatrix> gram((h * h.adjoint()).eval());
  // (H H^H)^{-1} H is the adjoint of H^H (H H^H)^{-1} since the Gram matrix is Hermitian.
  ComplexMatrix x = gram.solve(h).adjoint();
  // Refinement against H itself: forming the Gram squares the condition number,
  // the residual I - H X does not.
  const auto n = h.rows();
  for (int step = 0; step < tolerance::kRefinementSteps; ++step) {
    const ComplexMatrix r = ComplexMatrix::Identity(n, n) - h * x;
    x += h.adjoint() * gram.solve(r);
  }
  return x;
}

// Least-squares left inverse of a tall matrix: D (M x N, N <= M) -> N x M.
inline ComplexMatrix left_pseudo_inverse(const ComplexMatrix& d) {
  if (d.cols() == 0 || d.cols() > d.rows()) {
    throw DimensionError("left_pseudo_inverse: need 1 <= N <= M, got " + detail::shape(d));
  }
  const double cond = detail::require_full_rank(d, "left_pseudo_inverse");
  if (cond * cond > tolerance::kGramFallbackCondition) return detail::svd_pseudo_inverse(d);
  const Eigen::LLT<ComplexMatrix> gram((d.adjoint() * d).eval());
  ComplexMatrix x = gram.solve(d.adjoint());
  const auto n = d.cols();
  for (int step = 0; step < tolerance::kRefinementSteps; ++step) {
    const ComplexMatrix r = ComplexMatrix::Identity(n, n) - x * d;
    // R G^{-1} with G Hermitian.
    x += gram.solve(r.adjoint()).adjoint() * d.adjoint();
  }
  return x;
}

inline NormalizedRightMppi normalized_right_mppi(const ComplexMatrix& h,
                                                 PowerScaling scaling = PowerScaling::kUnitFrobenius) {
  const ComplexMatrix pinv = right_pseudo_inverse(h);
  double alpha = 1.0 / pinv.norm();
  if (scaling == PowerScaling::kPowerMatched) alpha *= std::sqrt(static_cast<double>(h.rows()));
  return {alpha * pinv, alpha};
}

inline NormalizedLeftMppi normalized_left_mppi(const ComplexMatrix& d,
                                               PowerScaling scaling = PowerScaling::kUnitFrobenius) {
  const ComplexMatrix pinv = left_pseudo_inverse(d);
  double beta = 1.0 / pinv.norm();
  if (scaling == PowerScaling::kPowerMatched) beta *= std::sqrt(static_cast<double>(d.cols()));
  return {beta * pinv, beta};
}

// ||H H^R - alpha I||_F / (alpha sqrt(N)).
inline double diagonalization_residual(const ComplexMatrix& h, const NormalizedRightMppi& r) {
  const auto n = h.rows();
  const ComplexMatrix err = h * r.matrix - r.alpha * ComplexMatrix::Identity(n, n);
  return err.norm() / (r.alpha * std::sqrt(static_cast<double>(n)));
}

// ||D^L D - beta I||_F / (beta sqrt(N)).
inline double diagonalization_residual(const ComplexMatrix& d, const NormalizedLeftMppi& l) {
  const auto n = d.cols();
  const ComplexMatrix err = l.matrix * d - l.beta * ComplexMatrix::Identity(n, n);
  return err.norm() / (l.beta * std::sqrt(static_cast<double>(n)));
}

}  // namespace ymimo
