#include "grr/legendre.hpp"

namespace grr {

void legendre_all(int n, double xi, double* value, double* d1, double* d2,
                  double* d3) {
  value[0] = 1.0;
  if (d1) d1[0] = 0.0;
  if (d2) d2[0] = 0.0;
  if (d3) d3[0] = 0.0;
  if (n == 0) return;
  value[1] = xi;
  if (d1) d1[1] = 1.0;
  if (d2) d2[1] = 0.0;
  if (d3) d3[1] = 0.0;
  for (int k = 1; k < n; ++k) {
    const double a = 2.0 * k + 1.0;
    value[k + 1] = (a * xi * value[k] - k * value[k - 1]) / (k + 1);
    if (d1) d1[k + 1] = d1[k - 1] + a * value[k];
    if (d2) d2[k + 1] = d2[k - 1] + a * d1[k];
    if (d3) d3[k + 1] = d3[k - 1] + a * d2[k];
  }
}

void Family1D::eval(double xi, VectorXd& value, VectorXd& d1, VectorXd& d2,
                    VectorXd* d3) const {
  const int nl = legendre_count();
  VectorXd pv(nl), p1(nl), p2(nl), p3;
  if (d3) p3.resize(nl);
  legendre_all(nl - 1, xi, pv.data(), p1.data(), p2.data(), d3 ? p3.data() : nullptr);
  value.noalias() = coeff.transpose() * pv;
  d1.noalias() = coeff.transpose() * p1;
  d2.noalias() = coeff.transpose() * p2;
  if (d3) d3->noalias() = coeff.transpose() * p3;
}

Family1D family_legendre(int deg) {
  Family1D f;
  f.coeff = MatrixXd::Identity(deg + 1, deg + 1);
  return f;
}

Family1D family_bubble(int deg) {
  if (deg < 2) throw NumericalError("bubble family needs degree >= 2");
  Family1D f;
  f.coeff = MatrixXd::Zero(deg + 1, deg - 1);
  for (int k = 0; k + 2 <= deg; ++k) {
    f.coeff(k + 2, k) = 1.0;
    f.coeff(k, k) = -1.0;
  }
  return f;
}

Family1D family_neumann(int deg) {
  if (deg < 2) throw NumericalError("neumann family needs degree >= 2");
  // Members: the constant, then antiderivatives of the integrated-Legendre
  // bubbles L_j = (P_j - P_{j-2})/(2j-1) for j = 2..deg-1 (degree j+1 each).
  Family1D f;
  f.coeff = MatrixXd::Zero(deg + 1, deg - 1);
  f.coeff(0, 0) = 1.0;
  for (int j = 2; j <= deg - 1; ++j) {
    VectorXd c = VectorXd::Zero(deg + 1);
    // antiderivative of P_j
    c(j + 1) += 1.0 / (2.0 * j + 1.0);
    c(j - 1) -= 1.0 / (2.0 * j + 1.0);
    // minus antiderivative of P_{j-2}
    if (j - 2 == 0) {
      c(1) -= 1.0;
      c(0) -= 1.0;
    } else {
      c(j - 1) -= 1.0 / (2.0 * j - 3.0);
      c(j - 3) += 1.0 / (2.0 * j - 3.0);
    }
    f.coeff.col(j - 1) = c / (2.0 * j - 1.0);
  }
  return f;
}

}  // namespace grr
