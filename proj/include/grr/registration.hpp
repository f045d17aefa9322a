#pragma once

#include <optional>

#include "grr/cpd.hpp"
#include "grr/mapspace.hpp"
#include "grr/mesh.hpp"
#include "grr/objective.hpp"
#include "grr/solver.hpp"

namespace grr {

enum class CloudRole { reference, target_sorted, target_raw };

struct PointCloud {
  MatrixXd points;  // (N x d)
  CloudRole role = CloudRole::reference;
};

MatrixXd read_cloud_csv(const std::string& path);
void write_cloud_csv(const std::string& path, const MatrixXd& points);

enum class RegMethod { tykhonov, morozov, inverted };

RegMethod reg_method_from_string(const std::string& s);
std::string to_string(RegMethod m);

/// Point-evaluation operator: B Phi = B_mat a + offset for Phi = id + sum a_m psi_m,
/// components stacked point-major within each component block
/// (all first components, then all second components).
struct BzSystem {
  MatrixXd B;       // (d*N x M)
  VectorXd offset;  // B applied to the identity
  VectorXd z;       // stacked target components
};

BzSystem assemble_Bz(const MapSpace& space, const MatrixXd& x_pts, const MatrixXd& y_pts);

struct RegistrationProblem {
  const MapSpace* space = nullptr;
  ObjectiveConfig objective;
  RegMethod method = RegMethod::tykhonov;
  double xi = 1e-5;         // Tykhonov weight (also the inverted penalty weight)
  double delta = 1e-4;      // Morozov misfit bound
  double delta_con = 1.0;   // inverted-formulation constraint bound
  MatrixXd x_pts, y_pts;
  const Mesh* mesh = nullptr;
  SolverConfig solver;
  std::optional<VectorXd> start;  // warm start; defaults to the identity map

  // Shared engine so repeated solves on one space reuse the cached tables.
  const ObjectiveEngine* engine = nullptr;
};

struct RegistrationMetrics {
  double misfit_inf = 0.0;
  double misfit_l2 = 0.0;
  double objective_value = 0.0;
  // Mesh metrics, present when the problem carries a mesh.
  double q_min = std::numeric_limits<double>::quiet_NaN();
  double min_det_ratio = std::numeric_limits<double>::quiet_NaN();
  // Sampled minimum of det(grad Phi) over the box (restricted to the mesh
  // footprint when a mesh is given); a grid lower-bound estimate.
  double j_min = std::numeric_limits<double>::quiet_NaN();
};

struct RegistrationResult {
  Mapping phi;
  SolveReport report;
  RegistrationMetrics metrics;
};

RegistrationResult register_map(const RegistrationProblem& problem);

struct CpdRegistrationResult {
  RegistrationResult registration;
  CpdResult cpd;
};

/// Two-step pipeline: CPD aligns the raw target cloud onto the reference
/// points, then the registration statement runs on the sorted pairs.
/// `reduced` switches CPD to the reduced displacement space.
CpdRegistrationResult register_with_cpd(const RegistrationProblem& tmpl,
                                        const MatrixXd& y_raw, const CpdConfig& cpd_cfg,
                                        const MapSpace* reduced = nullptr);

/// Deformed mesh: same connectivity, nodes mapped through Phi.
Mesh morph_mesh(const Mesh& mesh, const Mapping& phi);

/// Sampled J_min over an n x n tensor grid on the box; when a mesh is given
/// only grid points inside the mesh footprint count.
double jmin_grid(const Mapping& phi, const Mesh* mesh = nullptr, int n_per_dir = 100);

/// Mesh metrics of a deformed configuration.
void fill_mesh_metrics(const Mapping& phi, const Mesh& mesh, RegistrationMetrics& m);

}  // namespace grr
