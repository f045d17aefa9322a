#pragma once

#include <string>
#include <vector>

#include "grr/config.hpp"
#include "grr/mesh.hpp"
#include "grr/pod.hpp"
#include "grr/registration.hpp"

namespace grr {

// ---------------------------------------------------------------- three-point

/// Reference points (1/2,1/2), (1/4,1/4), (3/4,1/4).
MatrixXd three_point_reference();
/// Interpolated targets y_i(t) = (1-t) x_i + t y_i toward
/// (1/4,3/4), (1/16,1/16), (1/2,1/4).
MatrixXd three_point_targets(double t);

/// Structured triangulation of the unit square, n cells per side.
Mesh make_square_mesh(int n, int degree = 1);

// ----------------------------------------------------------------- ring-twist

/// (0,1)^2 with the (0.4,0.6)^2 hole removed; n must be a multiple of 5.
Mesh make_ring_mesh(int n, int degree = 1);

struct RingTwistPairs {
  MatrixXd x, y;
  Index n_inner = 0;  // leading rows are inner-boundary points
};

/// Inner-boundary nodes rotated about (0.5,0.5) by theta (degrees); outer
/// boundary nodes pinned with y = x.
RingTwistPairs ring_twist_pairs(const Mesh& mesh, double theta_deg);

// ------------------------------------------------------------------ two holes

struct TwoHoleParams {
  Vector3d nu1 = Vector3d::Zero();
  Vector3d nu2 = Vector3d::Zero();
};

/// Uniform sample over ([0.1,0.4]^2 x [0,pi/4])^2.
TwoHoleParams sample_two_hole_params(Rng& rng);

/// Boundary samples of both holes at t_k = 2 pi (k-1)/n_v, hole 1 block then
/// hole 2 block.  Null parameters give the reference circles of radius 1/2
/// centered at (-1,0) and (1,0).
MatrixXd two_hole_points(const TwoHoleParams* params, int n_v);

/// Triangulation of (-2,2)^2 with the two reference holes cut out and the
/// rim nodes projected onto the circles.
Mesh make_two_hole_mesh(int n, int degree = 1);

// --------------------------------------------------------------------- scales

struct ExperimentScale {
  bool paper = false;
  int nlp_three = 15;       // degree for the three-point space
  int nlp_ring = 15;        // degree for the ring-twist space
  int dim_two = 20;         // per-direction dimension for the two-hole space
  int mesh_n_three = 16;
  int mesh_n_ring = 20;
  int mesh_n_two = 36;
  int n_train = 30;
  int n_test = 8;
  int n_v = 100;
  int three_schedule = 10;  // t steps
  int ring_schedule = 15;   // theta steps to 120 degrees
};

ExperimentScale desk_scale();
ExperimentScale paper_scale();

// ------------------------------------------------------------------- pipeline

/// Shared state for the two-hole study: space, mesh, reference points and
/// the dense test samplings.
struct TwoHolesSetup {
  MapSpace space;
  Mesh mesh;
  ObjectiveConfig objective;  // exp_mesh, kappa 10
  int n_v = 100;
  MatrixXd x_pts;

  MatrixXd targets(const TwoHoleParams& p) const;
  MatrixXd test_curve(const TwoHoleParams& p) const;  // 5x denser
  RegistrationProblem problem(RegMethod method, double param) const;
};

TwoHolesSetup make_two_holes_setup(const ExperimentScale& scale);

struct SweepStats {
  double avg = 0.0, min = 0.0, max = 0.0;
};
SweepStats stats_of(const std::vector<double>& v);

/// Experiment drivers: write the metric tables (and eigenvalue curves) under
/// `out_dir`.  `experiment` is one of three-point | ring-twist | two-holes.
void run_table(const std::string& experiment, const ExperimentScale& scale,
               const std::string& out_dir, std::uint64_t seed, int jobs = 1);

}  // namespace grr
