#pragma once

#include <optional>

#include "grr/mapspace.hpp"

namespace grr {

struct CpdConfig {
  double w = 0.0;       // outlier weight in [0,1)
  double beta = 1.0;    // Gaussian kernel width
  double lambda = 1.0;  // displacement regularization weight
  int max_em_iters = 300;
  double tol_w = 1e-4;      // coefficient change (Frobenius)
  double tol_cover = 1e-5;  // max-min cover distance
  double sigma2_floor = 1e-12;
  // Low-rank kernel factorization + Woodbury solve for the coefficient
  // update; validated against the direct solve in the tests.
  bool lowrank = false;
  double lowrank_tol = 1e-10;  // relative eigenvalue cutoff

  void validate() const {
    if (w < 0.0 || w >= 1.0) throw InputError("cpd: w must lie in [0,1)");
    if (beta <= 0.0 || lambda <= 0.0) throw InputError("cpd: beta, lambda must be positive");
  }
};

struct CpdState {
  MatrixXd W;        // (N x d) kernel coefficients, or (M x 1) reduced coefficients
  double sigma2 = 0.0;
  MatrixXd P;        // (Q x N) posterior
  int iter = 0;
};

struct CpdResult {
  MatrixXd y_aligned;  // (N x d) moved reference points
  CpdState state;
  int iterations = 0;
  bool converged = false;
  double cover_dist = 0.0;
  double wall_time_s = 0.0;
};

/// Initial GMM variance: mean squared pairwise distance over d.
double cpd_init(const MatrixXd& X, const MatrixXd& Y_raw);

/// Posterior matrix for centroids `moved` and observations `Y_raw`.
MatrixXd e_step(const MatrixXd& moved, const MatrixXd& Y_raw, double sigma2, double w);

/// Gaussian kernel Gram of the reference cloud.
MatrixXd gaussian_gram(const MatrixXd& X, double beta);

/// Kernel-coefficient update.  Rows whose responsibility mass falls below
/// 1e-12 are removed from the solve and returned as zero.
MatrixXd m_step_W(const MatrixXd& X, const MatrixXd& Y_raw, const MatrixXd& P,
                  double sigma2, double lambda, double beta);

/// Closed-form variance update from the responsibility-weighted traces.
double m_step_sigma(const MatrixXd& Y_raw, const MatrixXd& P, const MatrixXd& Y_moved);

/// Full-space EM alignment.
CpdResult cpd_run(const MatrixXd& X, const MatrixXd& Y_raw, const CpdConfig& cfg);

/// Reduced-space variant: displacements live in the span of the space's
/// basis and are H2-regularized through its orthonormality.
CpdResult cpd_run_reduced(const MatrixXd& X, const MatrixXd& Y_raw, const CpdConfig& cfg,
                          const MapSpace& space);

}  // namespace grr
