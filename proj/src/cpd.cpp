#include "grr/cpd.hpp"

#include <chrono>
#include <cmath>

#include "grr/kernels.hpp"

namespace grr {

namespace {

using Clock = std::chrono::steady_clock;

double outlier_mass(double w, Index n, Index q, double sigma2, int d) {
  if (w <= 0.0) return 0.0;
  return w / (1.0 - w) * static_cast<double>(n) / static_cast<double>(q) *
         std::pow(2.0 * 3.14159265358979323846 * sigma2, 0.5 * d);
}

double cover_distance(const MatrixXd& Y_raw, const MatrixXd& moved) {
  return std::sqrt(min_nn_dist2(Y_raw, moved).maxCoeff());
}

}  // namespace

double cpd_init(const MatrixXd& X, const MatrixXd& Y_raw) {
  if (X.rows() == 0 || Y_raw.rows() == 0) throw InputError("cpd: empty point cloud");
  if (X.cols() != Y_raw.cols()) throw InputError("cpd: dimension mismatch");
  const Index n = X.rows(), q = Y_raw.rows();
  const int d = static_cast<int>(X.cols());
  double acc = 0.0;
  for (Index i = 0; i < q; ++i)
    for (Index j = 0; j < n; ++j) acc += (Y_raw.row(i) - X.row(j)).squaredNorm();
  return acc / (static_cast<double>(d) * n * q);
}

MatrixXd e_step(const MatrixXd& moved, const MatrixXd& Y_raw, double sigma2, double w) {
  if (sigma2 <= 0.0) throw NumericalError("cpd e_step: sigma2 must be positive");
  const double c = outlier_mass(w, moved.rows(), Y_raw.rows(), sigma2,
                                static_cast<int>(moved.cols()));
  return gmm_posterior(Y_raw, moved, sigma2, c);
}

MatrixXd gaussian_gram(const MatrixXd& X, double beta) {
  const Index n = X.rows();
  MatrixXd G(n, n);
  const double inv = 1.0 / (2.0 * beta * beta);
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i) {
    G(i, i) = 1.0;
    for (Index j = 0; j < i; ++j) {
      const double v = std::exp(-(X.row(i) - X.row(j)).squaredNorm() * inv);
      G(i, j) = v;
      G(j, i) = v;
    }
  }
  return G;
}

namespace {

// Retained-row solve of (G_rr + lambda sigma2 diag(1/p_r)) W_r = rhs_r.
MatrixXd solve_kernel_system(const MatrixXd& G, const VectorXd& p,
                             const MatrixXd& rhs_full, const std::vector<Index>& keep,
                             double lam_s2, bool lowrank, double lowrank_tol) {
  const Index nk = static_cast<Index>(keep.size());
  const Index d = rhs_full.cols();
  MatrixXd rhs(nk, d);
  VectorXd dreg(nk);
  for (Index r = 0; r < nk; ++r) {
    rhs.row(r) = rhs_full.row(keep[r]);
    dreg(r) = lam_s2 / p(keep[r]);
  }
  if (!lowrank) {
    MatrixXd A(nk, nk);
    for (Index r = 0; r < nk; ++r)
      for (Index c = 0; c < nk; ++c) A(r, c) = G(keep[r], keep[c]);
    A.diagonal() += dreg;
    Eigen::LDLT<MatrixXd> ldlt(A);
    if (ldlt.info() != Eigen::Success)
      throw NumericalError("cpd m-step: kernel system factorization failed");
    MatrixXd W = ldlt.solve(rhs);
    if ((A * W - rhs).norm() > 1e-6 * (1.0 + rhs.norm()))
      throw NumericalError("cpd m-step: kernel system nearly singular");
    return W;
  }
  // Low-rank path: G ~= V L V^T on the retained rows, Woodbury with the
  // diagonal regularizer.
  MatrixXd Gk(nk, nk);
  for (Index r = 0; r < nk; ++r)
    for (Index c = 0; c < nk; ++c) Gk(r, c) = G(keep[r], keep[c]);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(Gk);
  const VectorXd& ev = es.eigenvalues();
  const double cutoff = lowrank_tol * ev.maxCoeff();
  std::vector<Index> modes;
  for (Index i = 0; i < ev.size(); ++i)
    if (ev(i) > cutoff) modes.push_back(i);
  const Index k = static_cast<Index>(modes.size());
  MatrixXd V(nk, k);
  VectorXd lam(k);
  for (Index c = 0; c < k; ++c) {
    V.col(c) = es.eigenvectors().col(modes[c]);
    lam(c) = ev(modes[c]);
  }
  const VectorXd dinv = dreg.cwiseInverse();
  MatrixXd core = lam.cwiseInverse().asDiagonal();
  core += V.transpose() * dinv.asDiagonal() * V;
  const MatrixXd t = dinv.asDiagonal() * rhs;
  return t - dinv.asDiagonal() * (V * core.ldlt().solve(V.transpose() * t));
}

}  // namespace

MatrixXd m_step_W(const MatrixXd& X, const MatrixXd& Y_raw, const MatrixXd& P,
                  double sigma2, double lambda, double beta) {
  const Index n = X.rows();
  const VectorXd p = P.colwise().sum().transpose();
  std::vector<Index> keep;
  for (Index j = 0; j < n; ++j)
    if (p(j) >= 1e-12) keep.push_back(j);
  MatrixXd W = MatrixXd::Zero(n, X.cols());
  if (keep.empty()) return W;
  MatrixXd rhs_full = P.transpose() * Y_raw;
  for (Index j = 0; j < n; ++j) {
    if (p(j) >= 1e-12) rhs_full.row(j) /= p(j);
    rhs_full.row(j) -= X.row(j);
  }
  const MatrixXd G = gaussian_gram(X, beta);
  const MatrixXd Wk =
      solve_kernel_system(G, p, rhs_full, keep, lambda * sigma2, false, 0.0);
  for (std::size_t r = 0; r < keep.size(); ++r) W.row(keep[r]) = Wk.row(static_cast<Index>(r));
  return W;
}

double m_step_sigma(const MatrixXd& Y_raw, const MatrixXd& P, const MatrixXd& Y_moved) {
  const double qp = P.sum();
  if (qp <= 0.0) throw NumericalError("cpd m_step_sigma: zero responsibility mass");
  const int d = static_cast<int>(Y_raw.cols());
  const VectorXd row_mass = P.rowwise().sum();              // length Q
  const VectorXd col_mass = P.colwise().sum().transpose();  // length N
  const double t1 = (row_mass.asDiagonal() * Y_raw).cwiseProduct(Y_raw).sum();
  const double t2 = (P.transpose() * Y_raw).cwiseProduct(Y_moved).sum();
  const double t3 = (col_mass.asDiagonal() * Y_moved).cwiseProduct(Y_moved).sum();
  return (t1 - 2.0 * t2 + t3) / (qp * d);
}

CpdResult cpd_run(const MatrixXd& X, const MatrixXd& Y_raw, const CpdConfig& cfg) {
  cfg.validate();
  const auto t0 = Clock::now();
  const Index n = X.rows();
  const int d = static_cast<int>(X.cols());
  CpdResult res;
  res.state.sigma2 = cpd_init(X, Y_raw);
  res.state.W = MatrixXd::Zero(n, d);
  const MatrixXd G = gaussian_gram(X, cfg.beta);
  MatrixXd moved = X;
  for (int it = 1; it <= cfg.max_em_iters; ++it) {
    res.state.P = e_step(moved, Y_raw, res.state.sigma2, cfg.w);
    const VectorXd p = res.state.P.colwise().sum().transpose();
    std::vector<Index> keep;
    for (Index j = 0; j < n; ++j)
      if (p(j) >= 1e-12) keep.push_back(j);
    MatrixXd W_new = MatrixXd::Zero(n, d);
    if (!keep.empty()) {
      MatrixXd rhs_full = res.state.P.transpose() * Y_raw;
      for (Index j = 0; j < n; ++j) {
        if (p(j) >= 1e-12) rhs_full.row(j) /= p(j);
        rhs_full.row(j) -= X.row(j);
      }
      const MatrixXd Wk = solve_kernel_system(G, p, rhs_full, keep,
                                              cfg.lambda * res.state.sigma2, cfg.lowrank,
                                              cfg.lowrank_tol);
      for (std::size_t r = 0; r < keep.size(); ++r)
        W_new.row(keep[r]) = Wk.row(static_cast<Index>(r));
    }
    moved = X + G * W_new;
    res.state.sigma2 = std::max(m_step_sigma(Y_raw, res.state.P, moved), cfg.sigma2_floor);
    const double dw = (W_new - res.state.W).norm();
    res.state.W = std::move(W_new);
    res.state.iter = it;
    res.iterations = it;
    res.cover_dist = cover_distance(Y_raw, moved);
    if (dw < cfg.tol_w || res.cover_dist < cfg.tol_cover) {
      res.converged = true;
      break;
    }
  }
  res.y_aligned = std::move(moved);
  res.wall_time_s = std::chrono::duration<double>(Clock::now() - t0).count();
  return res;
}

CpdResult cpd_run_reduced(const MatrixXd& X, const MatrixXd& Y_raw, const CpdConfig& cfg,
                          const MapSpace& space) {
  cfg.validate();
  const auto t0 = Clock::now();
  const Index n = X.rows();
  const int d = static_cast<int>(X.cols());
  if (space.dim() != d) throw InputError("cpd reduced: space dimension mismatch");
  MatrixXd Psi;  // (n*d x M) basis values at the reference points
  space.eval_basis(X, &Psi, nullptr, nullptr);
  const Index m = space.size();

  CpdResult res;
  res.state.sigma2 = cpd_init(X, Y_raw);
  res.state.W = MatrixXd::Zero(m, 1);
  MatrixXd moved = X;
  VectorXd coeff = VectorXd::Zero(m);
  for (int it = 1; it <= cfg.max_em_iters; ++it) {
    res.state.P = e_step(moved, Y_raw, res.state.sigma2, cfg.w);
    const VectorXd p = res.state.P.colwise().sum().transpose();
    // A = lambda sigma2 I + Psi^T diag(p per point) Psi ; b = Psi^T vec(R)
    VectorXd prow(n * d);
    for (Index j = 0; j < n; ++j) prow.segment(j * d, d).setConstant(p(j));
    MatrixXd A = Psi.transpose() * prow.asDiagonal() * Psi;
    A.diagonal().array() += cfg.lambda * res.state.sigma2;
    MatrixXd R = res.state.P.transpose() * Y_raw - p.asDiagonal() * X;
    VectorXd rvec(n * d);
    for (Index j = 0; j < n; ++j)
      for (int r = 0; r < d; ++r) rvec(j * d + r) = R(j, r);
    const VectorXd b = Psi.transpose() * rvec;
    VectorXd coeff_new = A.ldlt().solve(b);
    const VectorXd disp = Psi * coeff_new;
    moved = X;
    for (Index j = 0; j < n; ++j)
      for (int r = 0; r < d; ++r) moved(j, r) += disp(j * d + r);
    res.state.sigma2 = std::max(m_step_sigma(Y_raw, res.state.P, moved), cfg.sigma2_floor);
    const double dw = (coeff_new - coeff).norm();
    coeff = std::move(coeff_new);
    res.state.W = coeff;
    res.state.iter = it;
    res.iterations = it;
    res.cover_dist = cover_distance(Y_raw, moved);
    if (dw < cfg.tol_w || res.cover_dist < cfg.tol_cover) {
      res.converged = true;
      break;
    }
  }
  res.y_aligned = std::move(moved);
  res.wall_time_s = std::chrono::duration<double>(Clock::now() - t0).count();
  return res;
}

}  // namespace grr
