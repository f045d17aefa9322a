#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "grr/common.hpp"

namespace grr {

enum class BoundaryCondition { none, normal_zero };
enum class SpaceKind { full, potential };

/// Axis-aligned box with positive volume.
struct Box {
  VectorXd lo, hi;

  static Box make(const VectorXd& lo, const VectorXd& hi);
  static Box square(double a, double b);  // (a,b)^2
  int dim() const { return static_cast<int>(lo.size()); }
  double volume() const;
  bool contains(const VectorXd& x, double tol = 1e-12) const;
};

struct BoxQuad {
  MatrixXd points;   // (P x d)
  VectorXd weights;  // sum to box volume
};

/// Tensor Gauss-Legendre rule with n points per direction.
BoxQuad box_quadrature(const Box& box, int n_per_dir);

/// Uniform samples on the box faces; for d=2, n per face.
MatrixXd box_boundary_samples(const Box& box, int n_per_face);

/// Displacement space of tensorized polynomials over a box with an
/// H2-orthonormal basis.
///
/// kind=full:       components are Q_degree polynomials; with
///                  bc=normal_zero the normal component vanishes on every
///                  face (exactly, through endpoint-vanishing 1-D factors).
/// kind=potential:  fields are gradients of Q_degree scalars whose normal
///                  derivative vanishes on the faces (bc=normal_zero) or of
///                  arbitrary Q_degree scalars (bc=none); constants dropped.
///
/// Basis fields are returned through evaluation tables:
///   values   row q*d + r          = (psi_m)_r at point q
///   grads    row q*d^2 + r*d + c  = d_c (psi_m)_r
///   hessians row q*d^3 + r*d^2 + i*d + j = d_i d_j (psi_m)_r
class MapSpace {
 public:
  static MapSpace build(const Box& box, int n_lp, BoundaryCondition bc,
                        SpaceKind kind);

  const Box& box() const { return box_; }
  int dim() const { return box_.dim(); }
  int degree() const { return degree_; }
  BoundaryCondition bc() const { return bc_; }
  SpaceKind kind() const { return kind_; }
  Index size() const { return basis_matrix_.cols(); }  // M

  /// Evaluate all basis fields at the given points (inside the closed box).
  /// Null table pointers are skipped.
  void eval_basis(const MatrixXd& points, MatrixXd* values, MatrixXd* grads,
                  MatrixXd* hessians) const;

  /// Quadrature rule and cached orthonormal basis tables at its points.
  const BoxQuad& quad() const { return quad_; }
  const MatrixXd& quad_values() const { return quad_values_; }
  const MatrixXd& quad_grads() const { return quad_grads_; }

  /// (1/|box|) int sum_{r,i,j} d_ij (u_m)_r d_ij (u_m')_r  -- the quadratic
  /// form behind the smoothness penalty.
  const MatrixXd& seminorm_matrix() const { return seminorm_matrix_; }

  /// Full H2 Gram of the basis as assembled by quadrature (near identity).
  const MatrixXd& h2_gram() const { return h2_gram_; }

  /// Space obtained by replacing the basis with combinations `modes`
  /// (columns are coefficient vectors in this space's basis).
  MapSpace subspace(const MatrixXd& modes) const;

  void save(const std::string& path) const;
  static MapSpace load(const std::string& path);
  std::uint64_t checksum() const { return checksum_; }

 private:
  MapSpace() = default;
  void finalize();  // tables, seminorm matrix, checksum

  Box box_;
  int degree_ = 0;
  BoundaryCondition bc_ = BoundaryCondition::none;
  SpaceKind kind_ = SpaceKind::full;
  MatrixXd basis_matrix_;  // (n_constrained x M) combinations of tensor functions
  BoxQuad quad_;
  MatrixXd quad_values_, quad_grads_;
  MatrixXd seminorm_matrix_, h2_gram_;
  std::uint64_t checksum_ = 0;

  friend struct MapSpaceAccess;
};

/// A mapping Phi = id + sum_m a_m psi_m over a space.
struct Mapping {
  const MapSpace* space = nullptr;
  VectorXd a;

  Mapping() = default;
  explicit Mapping(const MapSpace& s) : space(&s), a(VectorXd::Zero(s.size())) {}
  Mapping(const MapSpace& s, VectorXd coeffs) : space(&s), a(std::move(coeffs)) {}
};

struct MapEvalResult {
  MatrixXd values;   // (P x d) Phi(x)
  RowMat grads;      // (P x d*d) grad Phi row-major per point
  RowMat hessians;   // (P x d*d*d) second partials of Phi components
};

/// Phi, grad Phi and second derivatives at the given points.
/// `want_hessians=false` skips the third table.
MapEvalResult map_eval(const Mapping& phi, const MatrixXd& points,
                       bool want_hessians = false);

/// det(grad Phi) at each point.
VectorXd jacobian_det(const Mapping& phi, const MatrixXd& points);

/// Full H2(box) inner product of two displacement fields of the same space.
double h2_inner(const Mapping& u, const Mapping& v);

void save_mapping(const std::string& path, const Mapping& phi);
VectorXd load_mapping_coeffs(const std::string& path, const MapSpace& space);

}  // namespace grr
