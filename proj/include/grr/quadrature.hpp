#pragma once

#include "grr/common.hpp"

namespace grr {

struct GaussRule {
  VectorXd nodes;    // in (-1, 1)
  VectorXd weights;  // sum to 2
};

/// n-point Gauss-Legendre rule, exact for polynomials of degree 2n-1.
GaussRule gauss_legendre(int n);

/// Quadrature rule on the unit simplex {x in (0,1)^d : sum x_i < 1}.
/// Weights sum to the simplex volume (1/2 for d=2, 1/6 for d=3).
struct SimplexRule {
  MatrixXd points;  // (n_pts x d)
  VectorXd weights;
};

/// d=2 rules: degree 1 (centroid) and degree 4 (six points).
SimplexRule triangle_rule(int degree);

}  // namespace grr
