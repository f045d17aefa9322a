#pragma once

#include "grr/mapspace.hpp"

namespace grr {

/// Ordered samples of a closed curve (first/last adjacency implied).
struct SampledBoundary {
  MatrixXd points;  // (N x d), N >= 3

  double perimeter() const;
  static SampledBoundary circle(const Vector2d& center, double radius, int n);
};

/// Distance from a point to the sampled set, optionally refined by projecting
/// onto the polyline segments.
double dist_point_set(const VectorXd& x, const SampledBoundary& s,
                      bool segment_refine = true);

/// Symmetric Hausdorff distance between two sample sets.
double hausdorff(const MatrixXd& u, const MatrixXd& v);

/// Directed boundary distance: sup over rows of u_boundary of the distance
/// to v_boundary.
double dist_bnd(const MatrixXd& u_boundary, const MatrixXd& v_boundary);

/// Cover radius: sup over boundary samples of the distance to the point set.
double epsilon_cover(const MatrixXd& points, const SampledBoundary& boundary);

/// max_i min_j | Phi(x_i) - y_j |_2 against a dense test sampling.
double geo_error(const Mapping& phi, const MatrixXd& x_pts, const MatrixXd& test_curve);
double geo_error_points(const MatrixXd& mapped, const MatrixXd& test_curve);

struct TubeAreaResult {
  double estimate = 0.0;   // Monte Carlo area of the delta-neighborhood
  double bound = 0.0;      // 2 delta |boundary| (+ cubic term for d=3)
  double std_error = 0.0;  // Monte Carlo standard error of the estimate
  long n_samples = 0;
};

TubeAreaResult tube_area(const SampledBoundary& boundary, double delta, long n_mc,
                         std::uint64_t seed = 20240517ull);

/// Worst-case Hausdorff/boundary-distance ratio near a corner of half-angle
/// alpha in (0, pi/2].
double corner_constant(double alpha);

struct Prop31Report {
  double lhs = 0.0;        // directed boundary distance of the mapped domain
  double rhs = 0.0;        // max pair error + K * epsilon
  double max_pair_err = 0.0;
  double lipschitz_k = 0.0;
  double eps_cover = 0.0;
  bool holds(double slack = 1e-3) const { return lhs <= rhs * (1.0 + slack) + 1e-12; }
};

/// Numerical check of the covering bound: maps dense reference-boundary
/// samples through Phi, measures the directed distance to the target
/// boundary, and compares with max_i |Phi(x_i) - y_i| + K eps.
Prop31Report verify_prop31(const Mapping& phi, const MatrixXd& omega_boundary,
                           const MatrixXd& v_boundary, const MatrixXd& x_pts,
                           const MatrixXd& y_pts);

}  // namespace grr
