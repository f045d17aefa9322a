#pragma once

#include "grr/common.hpp"

namespace grr {

/// Legendre polynomial values P_0..P_n at xi in [-1,1], plus first and second
/// derivatives, via the three-term recurrence.  Endpoint values are exact in
/// floating point (P_k(+-1) = (+-1)^k).
void legendre_all(int n, double xi, double* value, double* d1, double* d2,
                  double* d3 = nullptr);

/// A family of 1-D functions given as Legendre coefficient columns:
/// family value_j(xi) = sum_k coeff(k, j) P_k(xi).
struct Family1D {
  MatrixXd coeff;  // (n_legendre x n_funcs)

  int size() const { return static_cast<int>(coeff.cols()); }
  int legendre_count() const { return static_cast<int>(coeff.rows()); }

  /// Evaluate all members and derivatives at xi; outputs have size().
  void eval(double xi, VectorXd& value, VectorXd& d1, VectorXd& d2,
            VectorXd* d3 = nullptr) const;
};

/// Full Legendre basis of degree <= deg (deg+1 functions).
Family1D family_legendre(int deg);

/// Functions of degree <= deg vanishing at both endpoints: b_k = P_{k+2} - P_k,
/// k = 0..deg-2.  Endpoint values are exactly zero.
Family1D family_bubble(int deg);

/// Functions of degree <= deg with derivative vanishing at both endpoints:
/// the constant plus antiderivatives of integrated-Legendre bubbles
/// (deg-1 functions).  Endpoint derivatives are exactly zero.
Family1D family_neumann(int deg);

}  // namespace grr
