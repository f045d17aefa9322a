#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>

#include "grr/common.hpp"

namespace grr {

/// Unit-simplex reference element: local nodes and Lagrange shape functions
/// for degree 1 or 2, d = 2 or 3.
struct ReferenceElement {
  int dim = 2;
  int degree = 1;
  MatrixXd local_nodes;  // (n_lp x dim)

  static ReferenceElement create(int dim, int degree);
  int n_lp() const { return static_cast<int>(local_nodes.rows()); }
};

/// Shape function values and gradients at a point of the closed reference
/// simplex.  values sum to 1, gradients sum to 0.
void shape_eval(const ReferenceElement& ref, const VectorXd& point,
                VectorXd& values, MatrixXd& gradients);

/// Simplicial mesh: nodes, fixed connectivity, elemental degree.
/// Immutable after construction; all member queries are const.
class Mesh {
 public:
  Mesh(int dim, int degree, MatrixXd nodes, Eigen::MatrixXi connectivity);

  /// Construction without the positive-Jacobian check, for deformed
  /// configurations that may legitimately contain inverted elements.
  static Mesh unchecked(int dim, int degree, MatrixXd nodes, Eigen::MatrixXi connectivity);

  int dim() const { return dim_; }
  int degree() const { return degree_; }
  Index n_nodes() const { return nodes_.rows(); }
  Index n_elems() const { return connectivity_.rows(); }
  const MatrixXd& nodes() const { return nodes_; }
  const Eigen::MatrixXi& connectivity() const { return connectivity_; }
  const ReferenceElement& reference() const { return ref_; }

  /// Element volume (area for d=2) of the undeformed element.
  double elem_volume(Index k) const;

 private:
  struct UncheckedTag {};
  Mesh(int dim, int degree, MatrixXd nodes, Eigen::MatrixXi connectivity, UncheckedTag);

  int dim_, degree_;
  MatrixXd nodes_;
  Eigen::MatrixXi connectivity_;
  ReferenceElement ref_;
};

struct ElementalMapResult {
  VectorXd x;      // mapped point
  MatrixXd grad;   // (d x d) Jacobian wrt reference coordinates
  double det;
};

/// Reference-to-physical map of element k at reference point xt.  When
/// `displaced_nodes` is given (same shape as mesh.nodes()), the element uses
/// those positions instead of the mesh nodes.
ElementalMapResult elemental_map(const Mesh& mesh, Index k, const VectorXd& xt,
                                 const MatrixXd* displaced_nodes = nullptr);

/// Inradius / circumradius of a triangle; 0 for degenerate input, 1/2 max.
double radius_ratio(const Eigen::Matrix<double, 3, 2>& vertices);

struct QualityResult {
  double q_min;
  VectorXd per_element;
};

/// Radius ratio per element computed on the (optionally deformed) vertex
/// triangles.  Pass the deformed node array from morphing; defaults to the
/// mesh's own nodes.
QualityResult mesh_quality(const Mesh& mesh, const MatrixXd* deformed_nodes = nullptr);

struct BijectivityResult {
  double min_det;  // min over elements/samples of det ratio, 1 for identity
  bool ok;
};

/// Minimum of det(grad Psi_deformed) / det(grad Psi) over elements and sample
/// points.  Degree-1 elements use one sample (exact); degree-2 elements are
/// sampled at the local nodes and a degree-4 quadrature rule.
BijectivityResult discrete_bijectivity(const Mesh& mesh, const MatrixXd& deformed_nodes,
                                       int samples_per_elem = 1);

Mesh read_mesh(const std::string& path);
void write_mesh(const std::string& path, const Mesh& mesh);

/// Uniform-grid element locator for point-in-mesh queries (vertex triangles).
class MeshLocator {
 public:
  explicit MeshLocator(const Mesh& mesh);
  /// Index of an element containing x, or -1.
  Index locate(const VectorXd& x) const;

 private:
  const Mesh& mesh_;
  Vector2d lo_, hi_;
  int nx_, ny_;
  std::vector<std::vector<int>> cells_;
};

}  // namespace grr
