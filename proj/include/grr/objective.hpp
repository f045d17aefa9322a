#pragma once

#include <optional>

#include "grr/mapspace.hpp"
#include "grr/mesh.hpp"

namespace grr {

enum class ObjectiveKind { h2, exp_jac, exp_mesh, lin_elastic, neohookean };

ObjectiveKind objective_kind_from_string(const std::string& s);
std::string to_string(ObjectiveKind k);

struct ObjectiveConfig {
  ObjectiveKind kind = ObjectiveKind::exp_jac;
  double epsilon = 0.1;       // soft Jacobian floor (exp_jac)
  double c_exp = 0.0;         // 0 -> 0.025 * epsilon
  double kappa_msh = 10.0;    // anisotropy threshold (exp_mesh)
  double lambda1 = 0.3 / (0.4 * 1.3);  // plane strain, E=1, nu=0.3
  double lambda2 = 1.0 / 1.3;
  int quad_order = 0;         // points per direction; 0 -> degree+2
  bool include_penalty = true;
  // The printed formula rewards distortion under minimization; the default
  // penalizes q above kappa.  The flag restores the literal sign.
  bool literal_exp_mesh_sign = false;
  double exp_clamp = 700.0;
  double q_cap_excess = 1e3;  // q when an element inverts: kappa + this

  double c_exp_effective() const { return c_exp > 0.0 ? c_exp : 0.025 * epsilon; }
};

/// Precomputed evaluation state for one (space, config, mesh) triple.
/// All evaluations are pure and reuse the cached basis tables.
class ObjectiveEngine {
 public:
  ObjectiveEngine(const MapSpace& space, ObjectiveConfig cfg, const Mesh* mesh = nullptr);

  /// Objective value (with the smoothness penalty when configured).
  double value(const VectorXd& a) const;
  double value_grad(const VectorXd& a, VectorXd& grad) const;

  /// The non-penalty part alone (constraint functional of the inverted
  /// formulation).  For kind=h2 this is zero.
  double raw_value_grad(const VectorXd& a, VectorXd* grad) const;

  double penalty(const VectorXd& a) const;
  void penalty_grad(const VectorXd& a, VectorXd& grad) const;

  const MapSpace& space() const { return *space_; }
  const ObjectiveConfig& config() const { return cfg_; }
  const Mesh* mesh() const { return mesh_; }

 private:
  double expjac_value_grad(const VectorXd& a, VectorXd* grad) const;
  double expmesh_value_grad(const VectorXd& a, VectorXd* grad) const;
  double elastic_value_grad(const VectorXd& a, VectorXd* grad) const;

  const MapSpace* space_;
  ObjectiveConfig cfg_;
  const Mesh* mesh_;
  // box quadrature tables (owned when a custom quad order is requested)
  const MatrixXd* grads_table_;
  const VectorXd* weights_;
  MatrixXd own_grads_;
  VectorXd own_weights_;
  // mesh node tables for exp_mesh
  MatrixXd node_values_;     // (n_nodes*d x M)
  MatrixXd shape_grads_;     // (n_qp*n_lp x d) reference shape gradients
  VectorXd elem_volume_;
  VectorXd qp_weights_;      // reference-element weights
};

// Spec-level convenience entry points.
double penalty_h2(const Mapping& phi);
double f_expjac(const Mapping& phi, const ObjectiveConfig& cfg);
double f_expmesh(const Mapping& phi, const Mesh& mesh, const ObjectiveConfig& cfg);
double f_linelastic(const Mapping& phi, const ObjectiveConfig& cfg);
double f_neohookean(const Mapping& phi, const ObjectiveConfig& cfg);
std::pair<double, VectorXd> objective_value_grad(const ObjectiveConfig& cfg,
                                                 const Mapping& phi,
                                                 const Mesh* mesh = nullptr);

}  // namespace grr
