#include "grr/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "grr/quadrature.hpp"

namespace grr {

ReferenceElement ReferenceElement::create(int dim, int degree) {
  if ((dim != 2 && dim != 3) || (degree != 1 && degree != 2))
    throw InputError("reference element: dim must be 2 or 3, degree 1 or 2");
  ReferenceElement ref;
  ref.dim = dim;
  ref.degree = degree;
  if (dim == 2) {
    if (degree == 1) {
      ref.local_nodes.resize(3, 2);
      ref.local_nodes << 0, 0, 1, 0, 0, 1;
    } else {
      ref.local_nodes.resize(6, 2);
      ref.local_nodes << 0, 0, 1, 0, 0, 1, 0.5, 0, 0.5, 0.5, 0, 0.5;
    }
  } else {
    if (degree == 1) {
      ref.local_nodes.resize(4, 3);
      ref.local_nodes << 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1;
    } else {
      ref.local_nodes.resize(10, 3);
      ref.local_nodes << 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1,
          0.5, 0, 0, 0.5, 0.5, 0, 0, 0.5, 0, 0, 0, 0.5, 0.5, 0, 0.5, 0, 0.5, 0.5;
    }
  }
  return ref;
}

void shape_eval(const ReferenceElement& ref, const VectorXd& point,
                VectorXd& values, MatrixXd& gradients) {
  const int d = ref.dim;
  if (point.size() != d) throw InputError("shape_eval: point dimension mismatch");
  double bsum = point.sum();
  const double tol = 1e-12;
  for (int i = 0; i < d; ++i)
    if (point(i) < -tol || point(i) > 1.0 + tol)
      throw NumericalError("shape_eval: point outside reference simplex");
  if (bsum > 1.0 + tol) throw NumericalError("shape_eval: point outside reference simplex");

  // Barycentric coordinates l0 = 1 - sum, l1..ld = point components.
  const int nb = d + 1;
  VectorXd lam(nb);
  lam(0) = 1.0 - bsum;
  for (int i = 0; i < d; ++i) lam(i + 1) = point(i);
  MatrixXd dlam = MatrixXd::Zero(nb, d);
  dlam.row(0).setConstant(-1.0);
  for (int i = 0; i < d; ++i) dlam(i + 1, i) = 1.0;

  const int n = ref.n_lp();
  values.resize(n);
  gradients.resize(n, d);
  if (ref.degree == 1) {
    for (int i = 0; i < n; ++i) {
      values(i) = lam(i);
      gradients.row(i) = dlam.row(i);
    }
    return;
  }
  // Degree 2: vertices lam_i (2 lam_i - 1), edges 4 lam_i lam_j.
  for (int i = 0; i < nb; ++i) {
    values(i) = lam(i) * (2.0 * lam(i) - 1.0);
    gradients.row(i) = (4.0 * lam(i) - 1.0) * dlam.row(i);
  }
  static const int edges2[3][2] = {{0, 1}, {1, 2}, {2, 0}};
  static const int edges3[6][2] = {{0, 1}, {1, 2}, {2, 0}, {0, 3}, {1, 3}, {2, 3}};
  const int ne = (d == 2) ? 3 : 6;
  for (int e = 0; e < ne; ++e) {
    const int a = (d == 2) ? edges2[e][0] : edges3[e][0];
    const int b = (d == 2) ? edges2[e][1] : edges3[e][1];
    values(nb + e) = 4.0 * lam(a) * lam(b);
    gradients.row(nb + e) = 4.0 * (lam(a) * dlam.row(b) + lam(b) * dlam.row(a));
  }
}

Mesh::Mesh(int dim, int degree, MatrixXd nodes, Eigen::MatrixXi connectivity)
    : dim_(dim),
      degree_(degree),
      nodes_(std::move(nodes)),
      connectivity_(std::move(connectivity)),
      ref_(ReferenceElement::create(dim, degree)) {
  if (nodes_.cols() != dim_) throw InputError("mesh: node dimension mismatch");
  if (connectivity_.cols() != ref_.n_lp())
    throw InputError("mesh: expected " + std::to_string(ref_.n_lp()) +
                     " nodes per element, got " + std::to_string(connectivity_.cols()));
  for (Index k = 0; k < connectivity_.rows(); ++k)
    for (Index i = 0; i < connectivity_.cols(); ++i) {
      const int idx = connectivity_(k, i);
      if (idx < 0 || idx >= nodes_.rows())
        throw InputError("mesh: connectivity index out of range in element " +
                         std::to_string(k));
    }
  // Undeformed elemental Jacobians must be positive.
  VectorXd centroid = VectorXd::Constant(dim_, 1.0 / (dim_ + 1.0));
  for (Index k = 0; k < n_elems(); ++k) {
    const auto m = elemental_map(*this, k, centroid);
    if (m.det <= 0.0)
      throw InputError("mesh: nonpositive Jacobian in element " + std::to_string(k));
  }
}

Mesh Mesh::unchecked(int dim, int degree, MatrixXd nodes, Eigen::MatrixXi connectivity) {
  Mesh m(dim, degree, MatrixXd(), Eigen::MatrixXi(), UncheckedTag{});
  m.nodes_ = std::move(nodes);
  m.connectivity_ = std::move(connectivity);
  if (m.nodes_.cols() != dim) throw InputError("mesh: node dimension mismatch");
  if (m.connectivity_.cols() != m.ref_.n_lp())
    throw InputError("mesh: nodes-per-element mismatch");
  return m;
}

Mesh::Mesh(int dim, int degree, MatrixXd nodes, Eigen::MatrixXi connectivity, UncheckedTag)
    : dim_(dim),
      degree_(degree),
      nodes_(std::move(nodes)),
      connectivity_(std::move(connectivity)),
      ref_(ReferenceElement::create(dim, degree)) {}

double Mesh::elem_volume(Index k) const {
  VectorXd centroid = VectorXd::Constant(dim_, 1.0 / (dim_ + 1.0));
  // For straight-sided elements the vertex simplex volume; degree-2 elements
  // are treated the same way (vertex simplex).
  MatrixXd edges(dim_, dim_);
  for (int i = 0; i < dim_; ++i)
    edges.col(i) = (nodes_.row(connectivity_(k, i + 1)) - nodes_.row(connectivity_(k, 0)))
                       .transpose();
  const double fact = (dim_ == 2) ? 2.0 : 6.0;
  return std::abs(edges.determinant()) / fact;
}

ElementalMapResult elemental_map(const Mesh& mesh, Index k, const VectorXd& xt,
                                 const MatrixXd* displaced_nodes) {
  if (k < 0 || k >= mesh.n_elems()) throw InputError("elemental_map: element index");
  const MatrixXd& pos = displaced_nodes ? *displaced_nodes : mesh.nodes();
  VectorXd values;
  MatrixXd grads;
  shape_eval(mesh.reference(), xt, values, grads);
  const int d = mesh.dim();
  ElementalMapResult out;
  out.x = VectorXd::Zero(d);
  out.grad = MatrixXd::Zero(d, d);
  for (int i = 0; i < mesh.reference().n_lp(); ++i) {
    const int ni = mesh.connectivity()(k, i);
    out.x += values(i) * pos.row(ni).transpose();
    out.grad += pos.row(ni).transpose() * grads.row(i);
  }
  out.det = out.grad.determinant();
  return out;
}

double radius_ratio(const Eigen::Matrix<double, 3, 2>& v) {
  const double a = (v.row(1) - v.row(2)).norm();
  const double b = (v.row(0) - v.row(2)).norm();
  const double c = (v.row(0) - v.row(1)).norm();
  const double per = a + b + c;
  if (per <= 0.0) return 0.0;
  const double area2 = std::abs((v(1, 0) - v(0, 0)) * (v(2, 1) - v(0, 1)) -
                                (v(2, 0) - v(0, 0)) * (v(1, 1) - v(0, 1)));
  if (area2 <= 0.0 || a <= 0.0 || b <= 0.0 || c <= 0.0) return 0.0;
  // r = 2A / perimeter, R = abc / (4A)  =>  r/R = 8 A^2 / (perimeter abc)
  const double area = 0.5 * area2;
  return 8.0 * area * area / (per * a * b * c);
}

QualityResult mesh_quality(const Mesh& mesh, const MatrixXd* deformed_nodes) {
  if (mesh.dim() != 2) throw InputError("mesh_quality: implemented for d=2");
  const MatrixXd& pos = deformed_nodes ? *deformed_nodes : mesh.nodes();
  QualityResult r;
  r.per_element.resize(mesh.n_elems());
  const Index ne = mesh.n_elems();
#pragma omp parallel for schedule(static)
  for (Index k = 0; k < ne; ++k) {
    Eigen::Matrix<double, 3, 2> tri;
    for (int i = 0; i < 3; ++i) tri.row(i) = pos.row(mesh.connectivity()(k, i));
    r.per_element(k) = radius_ratio(tri);
  }
  r.q_min = r.per_element.minCoeff();
  return r;
}

BijectivityResult discrete_bijectivity(const Mesh& mesh, const MatrixXd& deformed_nodes,
                                       int samples_per_elem) {
  if (samples_per_elem < 1) throw InputError("discrete_bijectivity: samples_per_elem >= 1");
  // Sample set: degree 1 -> centroid (det is constant, one sample exact);
  // degree 2 -> local nodes plus a degree-4 rule.
  std::vector<VectorXd> samples;
  VectorXd centroid = VectorXd::Constant(mesh.dim(), 1.0 / (mesh.dim() + 1.0));
  if (mesh.degree() == 1) {
    samples.push_back(centroid);
  } else {
    for (int i = 0; i < mesh.reference().n_lp(); ++i)
      samples.push_back(mesh.reference().local_nodes.row(i).transpose());
    if (mesh.dim() == 2) {
      const auto rule = triangle_rule(4);
      for (Index q = 0; q < rule.points.rows(); ++q)
        samples.push_back(rule.points.row(q).transpose());
    } else {
      samples.push_back(centroid);
    }
  }
  const Index ne = mesh.n_elems();
  VectorXd elem_min(ne);
#pragma omp parallel for schedule(static)
  for (Index k = 0; k < ne; ++k) {
    double mn = std::numeric_limits<double>::infinity();
    for (const auto& s : samples) {
      const double d0 = elemental_map(mesh, k, s).det;
      const double d1 = elemental_map(mesh, k, s, &deformed_nodes).det;
      mn = std::min(mn, d1 / d0);
    }
    elem_min(k) = mn;
  }
  BijectivityResult out;
  out.min_det = elem_min.minCoeff();
  out.ok = out.min_det > 0.0;
  return out;
}

namespace {

std::string strip_comment(const std::string& line) {
  const auto pos = line.find('#');
  return pos == std::string::npos ? line : line.substr(0, pos);
}

int cell_of(double v, double lo, double hi, int n) {
  if (hi <= lo) return 0;
  int c = static_cast<int>((v - lo) / (hi - lo) * n);
  return std::clamp(c, 0, n - 1);
}

}  // namespace

Mesh read_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open mesh file: " + path);
  int lineno = 0;
  auto next_tokens = [&](std::vector<std::string>& toks) {
    std::string line;
    while (std::getline(in, line)) {
      ++lineno;
      std::istringstream ss(strip_comment(line));
      toks.clear();
      std::string t;
      while (ss >> t) toks.push_back(t);
      if (!toks.empty()) return true;
    }
    return false;
  };
  std::vector<std::string> toks;
  if (!next_tokens(toks) || toks.size() != 4)
    throw InputError(path + ":" + std::to_string(lineno) +
                     ": expected header 'd p N_nodes N_elems'");
  int d, p;
  Index nn, ne;
  try {
    d = std::stoi(toks[0]);
    p = std::stoi(toks[1]);
    nn = std::stol(toks[2]);
    ne = std::stol(toks[3]);
  } catch (const std::exception&) {
    throw InputError(path + ":" + std::to_string(lineno) + ": malformed header");
  }
  const int n_lp = ReferenceElement::create(d, p).n_lp();
  MatrixXd nodes(nn, d);
  for (Index i = 0; i < nn; ++i) {
    if (!next_tokens(toks) || static_cast<int>(toks.size()) != d)
      throw InputError(path + ":" + std::to_string(lineno) + ": expected " +
                       std::to_string(d) + " coordinates for node " + std::to_string(i + 1));
    for (int j = 0; j < d; ++j) nodes(i, j) = std::stod(toks[j]);
  }
  Eigen::MatrixXi conn(ne, n_lp);
  for (Index k = 0; k < ne; ++k) {
    if (!next_tokens(toks) || static_cast<int>(toks.size()) != n_lp)
      throw InputError(path + ":" + std::to_string(lineno) + ": expected " +
                       std::to_string(n_lp) + " indices for element " + std::to_string(k + 1));
    for (int j = 0; j < n_lp; ++j) conn(k, j) = std::stoi(toks[j]) - 1;  // 1-based on disk
  }
  if (next_tokens(toks))
    throw InputError(path + ":" + std::to_string(lineno) + ": trailing content after " +
                     std::to_string(ne) + " elements");
  return Mesh(d, p, std::move(nodes), std::move(conn));
}

void write_mesh(const std::string& path, const Mesh& mesh) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write mesh file: " + path);
  out << mesh.dim() << ' ' << mesh.degree() << ' ' << mesh.n_nodes() << ' '
      << mesh.n_elems() << '\n';
  for (Index i = 0; i < mesh.n_nodes(); ++i) {
    for (int j = 0; j < mesh.dim(); ++j)
      out << (j ? " " : "") << fmt17(mesh.nodes()(i, j));
    out << '\n';
  }
  for (Index k = 0; k < mesh.n_elems(); ++k) {
    for (Index j = 0; j < mesh.connectivity().cols(); ++j)
      out << (j ? " " : "") << mesh.connectivity()(k, j) + 1;
    out << '\n';
  }
}

MeshLocator::MeshLocator(const Mesh& mesh) : mesh_(mesh) {
  if (mesh.dim() != 2) throw InputError("MeshLocator: implemented for d=2");
  lo_ = mesh.nodes().colwise().minCoeff().transpose();
  hi_ = mesh.nodes().colwise().maxCoeff().transpose();
  const int target = static_cast<int>(std::sqrt(static_cast<double>(mesh.n_elems()))) + 1;
  nx_ = std::max(1, target);
  ny_ = nx_;
  cells_.assign(static_cast<std::size_t>(nx_) * ny_, {});
  for (Index k = 0; k < mesh.n_elems(); ++k) {
    Vector2d elo = Vector2d::Constant(std::numeric_limits<double>::infinity());
    Vector2d ehi = -elo;
    for (int i = 0; i < 3; ++i) {
      const Vector2d v = mesh.nodes().row(mesh.connectivity()(k, i)).transpose();
      elo = elo.cwiseMin(v);
      ehi = ehi.cwiseMax(v);
    }
    const int i0 = cell_of(elo.x(), lo_.x(), hi_.x(), nx_), i1 = cell_of(ehi.x(), lo_.x(), hi_.x(), nx_);
    const int j0 = cell_of(elo.y(), lo_.y(), hi_.y(), ny_), j1 = cell_of(ehi.y(), lo_.y(), hi_.y(), ny_);
    for (int i = i0; i <= i1; ++i)
      for (int j = j0; j <= j1; ++j) cells_[static_cast<std::size_t>(i) * ny_ + j].push_back(static_cast<int>(k));
  }
}

Index MeshLocator::locate(const VectorXd& x) const {
  if (x.x() < lo_.x() || x.x() > hi_.x() || x.y() < lo_.y() || x.y() > hi_.y()) return -1;
  const int i = cell_of(x.x(), lo_.x(), hi_.x(), nx_);
  const int j = cell_of(x.y(), lo_.y(), hi_.y(), ny_);
  for (int k : cells_[static_cast<std::size_t>(i) * ny_ + j]) {
    // barycentric containment on the vertex triangle
    const Vector2d a = mesh_.nodes().row(mesh_.connectivity()(k, 0)).transpose();
    const Vector2d b = mesh_.nodes().row(mesh_.connectivity()(k, 1)).transpose();
    const Vector2d c = mesh_.nodes().row(mesh_.connectivity()(k, 2)).transpose();
    const double det = (b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y());
    if (det == 0.0) continue;
    const double l1 = ((x.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (x.y() - a.y())) / det;
    const double l2 = ((b.x() - a.x()) * (x.y() - a.y()) - (x.x() - a.x()) * (b.y() - a.y())) / det;
    const double tol = -1e-12;
    if (l1 >= tol && l2 >= tol && 1.0 - l1 - l2 >= tol) return k;
  }
  return -1;
}

}  // namespace grr
