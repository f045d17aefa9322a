#pragma once

#include "grr/common.hpp"

namespace grr {

// Hot inner loops, each with a serial reference implementation and an
// OpenMP variant.  Both produce bit-identical results: per-item terms go
// into buffers and are reduced with pairwise_sum (or min/max, which are
// order-independent), so the parallel variant is checked against the
// serial one in the tests and timed against it in the bench target.

/// Per-query squared distance to the nearest point of `ref`.
/// `query` is (Q x d), `ref` is (N x d); result has Q entries.
VectorXd min_nn_dist2_serial(const MatrixXd& query, const MatrixXd& ref);
VectorXd min_nn_dist2_parallel(const MatrixXd& query, const MatrixXd& ref);
inline VectorXd min_nn_dist2(const MatrixXd& query, const MatrixXd& ref) {
  return min_nn_dist2_parallel(query, ref);
}

/// Gaussian-mixture posterior rows.  `moved` holds the centroids (N x d),
/// `target` the observations (Q x d).  P(i,j) = exp(-|y_i-mu_j|^2 / 2s2)
/// normalized over j with additive outlier mass c >= 0.  Rows are shifted
/// by their max exponent before normalization.
MatrixXd gmm_posterior_serial(const MatrixXd& target, const MatrixXd& moved,
                              double sigma2, double outlier_c);
MatrixXd gmm_posterior_parallel(const MatrixXd& target, const MatrixXd& moved,
                                double sigma2, double outlier_c);
inline MatrixXd gmm_posterior(const MatrixXd& target, const MatrixXd& moved,
                              double sigma2, double outlier_c) {
  return gmm_posterior_parallel(target, moved, sigma2, outlier_c);
}

/// Pointwise exp((eps - det(I + Gu)) / c_exp) terms for quadrature.
/// `grad_u` is (P x d*d), row-major per point; on return `terms(q)` holds
/// w(q) * exp(arg) and `sens` (P x d*d) the derivative of that term with
/// respect to the entries of Gu.  Exponents are clamped at `exp_clamp`.
void expjac_terms_serial(const RowMat& grad_u, const VectorXd& weights,
                         double eps, double c_exp, double exp_clamp,
                         VectorXd& terms, RowMat& sens);
void expjac_terms_parallel(const RowMat& grad_u, const VectorXd& weights,
                           double eps, double c_exp, double exp_clamp,
                           VectorXd& terms, RowMat& sens);
inline void expjac_terms(const RowMat& grad_u, const VectorXd& weights,
                         double eps, double c_exp, double exp_clamp,
                         VectorXd& terms, RowMat& sens) {
  expjac_terms_parallel(grad_u, weights, eps, c_exp, exp_clamp, terms, sens);
}

/// det(I + Gu) per point, grad_u as above (d = 2 or 3).
VectorXd det_of_map_serial(const RowMat& grad_u);
VectorXd det_of_map_parallel(const RowMat& grad_u);
inline VectorXd det_of_map(const RowMat& grad_u) {
  return det_of_map_parallel(grad_u);
}

}  // namespace grr
