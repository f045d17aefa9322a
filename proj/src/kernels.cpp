#include "grr/kernels.hpp"

#include <cmath>

namespace grr {

double pairwise_sum(std::span<const double> terms) {
  const std::size_t n = terms.size();
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = 0.0;
    for (double t : terms) s += t;
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(terms.subspan(0, half)) + pairwise_sum(terms.subspan(half));
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

inline double row_min_dist2(const MatrixXd& query, Index i, const MatrixXd& ref) {
  const Index d = query.cols();
  double best = std::numeric_limits<double>::infinity();
  for (Index j = 0; j < ref.rows(); ++j) {
    double s = 0.0;
    for (Index k = 0; k < d; ++k) s += sq(query(i, k) - ref(j, k));
    if (s < best) best = s;
  }
  return best;
}

inline void posterior_row(const MatrixXd& target, const MatrixXd& moved,
                          double inv2s2, double outlier_c, Index i, MatrixXd& P) {
  const Index n = moved.rows(), d = moved.cols();
  double mx = -std::numeric_limits<double>::infinity();
  for (Index j = 0; j < n; ++j) {
    double s = 0.0;
    for (Index k = 0; k < d; ++k) s += sq(target(i, k) - moved(j, k));
    const double e = -s * inv2s2;
    P(i, j) = e;
    if (e > mx) mx = e;
  }
  // Shifted normalization; the outlier mass is shifted consistently and the
  // row collapses to zero when it dominates beyond double range.
  double denom = 0.0;
  for (Index j = 0; j < n; ++j) {
    P(i, j) = std::exp(P(i, j) - mx);
    denom += P(i, j);
  }
  if (outlier_c > 0.0) {
    const double log_shifted = std::log(outlier_c) - mx;
    if (log_shifted > 700.0) {
      P.row(i).setZero();
      return;
    }
    denom += std::exp(log_shifted);
  }
  P.row(i) /= denom;
}

template <int D>
inline void expjac_point(const double* g, double w, double eps, double c_exp,
                         double clamp, double& term, double* s);

template <>
inline void expjac_point<2>(const double* g, double w, double eps, double c_exp,
                            double clamp, double& term, double* s) {
  // A = I + Gu, row-major g = [g00 g01 g10 g11]
  const double a00 = 1.0 + g[0], a01 = g[1], a10 = g[2], a11 = 1.0 + g[3];
  const double det = a00 * a11 - a01 * a10;
  double arg = (eps - det) / c_exp;
  bool clamped = arg > clamp;
  if (clamped) arg = clamp;
  const double e = std::exp(arg);
  term = w * e;
  const double f = clamped ? 0.0 : -w * e / c_exp;
  // d det / dA = cofactor matrix
  s[0] = f * a11;
  s[1] = f * (-a10);
  s[2] = f * (-a01);
  s[3] = f * a00;
}

template <>
inline void expjac_point<3>(const double* g, double w, double eps, double c_exp,
                            double clamp, double& term, double* s) {
  double a[9] = {1.0 + g[0], g[1], g[2], g[3], 1.0 + g[4], g[5], g[6], g[7], 1.0 + g[8]};
  const double c00 = a[4] * a[8] - a[5] * a[7];
  const double c01 = a[5] * a[6] - a[3] * a[8];
  const double c02 = a[3] * a[7] - a[4] * a[6];
  const double det = a[0] * c00 + a[1] * c01 + a[2] * c02;
  double arg = (eps - det) / c_exp;
  bool clamped = arg > clamp;
  if (clamped) arg = clamp;
  const double e = std::exp(arg);
  term = w * e;
  const double f = clamped ? 0.0 : -w * e / c_exp;
  s[0] = f * c00;
  s[1] = f * c01;
  s[2] = f * c02;
  s[3] = f * (a[2] * a[7] - a[1] * a[8]);
  s[4] = f * (a[0] * a[8] - a[2] * a[6]);
  s[5] = f * (a[1] * a[6] - a[0] * a[7]);
  s[6] = f * (a[1] * a[5] - a[2] * a[4]);
  s[7] = f * (a[2] * a[3] - a[0] * a[5]);
  s[8] = f * (a[0] * a[4] - a[1] * a[3]);
}

inline double det_point(const double* g, Index dd) {
  if (dd == 4) {
    return (1.0 + g[0]) * (1.0 + g[3]) - g[1] * g[2];
  }
  const double a[9] = {1.0 + g[0], g[1], g[2], g[3], 1.0 + g[4], g[5], g[6], g[7], 1.0 + g[8]};
  return a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6]) +
         a[2] * (a[3] * a[7] - a[4] * a[6]);
}

}  // namespace

VectorXd min_nn_dist2_serial(const MatrixXd& query, const MatrixXd& ref) {
  VectorXd out(query.rows());
  for (Index i = 0; i < query.rows(); ++i) out(i) = row_min_dist2(query, i, ref);
  return out;
}

VectorXd min_nn_dist2_parallel(const MatrixXd& query, const MatrixXd& ref) {
  VectorXd out(query.rows());
  const Index q = query.rows();
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < q; ++i) out(i) = row_min_dist2(query, i, ref);
  return out;
}

MatrixXd gmm_posterior_serial(const MatrixXd& target, const MatrixXd& moved,
                              double sigma2, double outlier_c) {
  MatrixXd P(target.rows(), moved.rows());
  const double inv2s2 = 1.0 / (2.0 * sigma2);
  for (Index i = 0; i < target.rows(); ++i)
    posterior_row(target, moved, inv2s2, outlier_c, i, P);
  return P;
}

MatrixXd gmm_posterior_parallel(const MatrixXd& target, const MatrixXd& moved,
                                double sigma2, double outlier_c) {
  MatrixXd P(target.rows(), moved.rows());
  const double inv2s2 = 1.0 / (2.0 * sigma2);
  const Index q = target.rows();
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < q; ++i) posterior_row(target, moved, inv2s2, outlier_c, i, P);
  return P;
}

void expjac_terms_serial(const RowMat& grad_u, const VectorXd& weights,
                         double eps, double c_exp, double exp_clamp,
                         VectorXd& terms, RowMat& sens) {
  const Index p = grad_u.rows(), dd = grad_u.cols();
  terms.resize(p);
  sens.resize(p, dd);
  for (Index q = 0; q < p; ++q) {
    if (dd == 4)
      expjac_point<2>(grad_u.row(q).data(), weights(q), eps, c_exp, exp_clamp,
                      terms(q), sens.row(q).data());
    else
      expjac_point<3>(grad_u.row(q).data(), weights(q), eps, c_exp, exp_clamp,
                      terms(q), sens.row(q).data());
  }
}

void expjac_terms_parallel(const RowMat& grad_u, const VectorXd& weights,
                           double eps, double c_exp, double exp_clamp,
                           VectorXd& terms, RowMat& sens) {
  const Index p = grad_u.rows(), dd = grad_u.cols();
  terms.resize(p);
  sens.resize(p, dd);
#pragma omp parallel for schedule(static)
  for (Index q = 0; q < p; ++q) {
    if (dd == 4)
      expjac_point<2>(grad_u.row(q).data(), weights(q), eps, c_exp, exp_clamp,
                      terms(q), sens.row(q).data());
    else
      expjac_point<3>(grad_u.row(q).data(), weights(q), eps, c_exp, exp_clamp,
                      terms(q), sens.row(q).data());
  }
}

VectorXd det_of_map_serial(const RowMat& grad_u) {
  VectorXd out(grad_u.rows());
  for (Index q = 0; q < grad_u.rows(); ++q)
    out(q) = det_point(grad_u.row(q).data(), grad_u.cols());
  return out;
}

VectorXd det_of_map_parallel(const RowMat& grad_u) {
  VectorXd out(grad_u.rows());
  const Index p = grad_u.rows();
#pragma omp parallel for schedule(static)
  for (Index q = 0; q < p; ++q)
    out(q) = det_point(grad_u.row(q).data(), grad_u.cols());
  return out;
}

}  // namespace grr
