#include "grr/mapspace.hpp"

#include <array>
#include <cmath>
#include <cstring>
#include <fstream>

#include "grr/kernels.hpp"
#include "grr/legendre.hpp"
#include "grr/quadrature.hpp"

namespace grr {

Box Box::make(const VectorXd& lo, const VectorXd& hi) {
  if (lo.size() != hi.size() || lo.size() < 2 || lo.size() > 3)
    throw InputError("box: lo/hi must both have dimension 2 or 3");
  for (Index i = 0; i < lo.size(); ++i)
    if (!(lo(i) < hi(i))) throw InputError("box: lo < hi required componentwise");
  return Box{lo, hi};
}

Box Box::square(double a, double b) {
  VectorXd lo(2), hi(2);
  lo << a, a;
  hi << b, b;
  return make(lo, hi);
}

double Box::volume() const {
  double v = 1.0;
  for (Index i = 0; i < lo.size(); ++i) v *= hi(i) - lo(i);
  return v;
}

bool Box::contains(const VectorXd& x, double tol) const {
  if (x.size() != lo.size()) return false;
  for (Index i = 0; i < lo.size(); ++i) {
    const double pad = tol * (hi(i) - lo(i));
    if (x(i) < lo(i) - pad || x(i) > hi(i) + pad) return false;
  }
  return true;
}

BoxQuad box_quadrature(const Box& box, int n_per_dir) {
  const int d = box.dim();
  const GaussRule g = gauss_legendre(n_per_dir);
  const Index total = static_cast<Index>(std::pow(n_per_dir, d));
  BoxQuad q;
  q.points.resize(total, d);
  q.weights.resize(total);
  std::vector<int> idx(d, 0);
  for (Index p = 0; p < total; ++p) {
    double w = 1.0;
    for (int i = 0; i < d; ++i) {
      const double half = 0.5 * (box.hi(i) - box.lo(i));
      q.points(p, i) = box.lo(i) + half * (1.0 + g.nodes(idx[i]));
      w *= half * g.weights(idx[i]);
    }
    q.weights(p) = w;
    for (int i = d - 1; i >= 0; --i) {
      if (++idx[i] < n_per_dir) break;
      idx[i] = 0;
    }
  }
  return q;
}

MatrixXd box_boundary_samples(const Box& box, int n_per_face) {
  if (box.dim() != 2) throw InputError("box_boundary_samples: d=2 only");
  MatrixXd out(4 * n_per_face, 2);
  for (int i = 0; i < n_per_face; ++i) {
    const double t = (i + 0.5) / n_per_face;
    const double x = box.lo(0) + t * (box.hi(0) - box.lo(0));
    const double y = box.lo(1) + t * (box.hi(1) - box.lo(1));
    out.row(0 * n_per_face + i) << x, box.lo(1);
    out.row(1 * n_per_face + i) << x, box.hi(1);
    out.row(2 * n_per_face + i) << box.lo(0), y;
    out.row(3 * n_per_face + i) << box.hi(0), y;
  }
  return out;
}

namespace {

// Constrained tensor layout: list of tensor functions prior to
// orthonormalization.  slot = field component for kind=full, single scalar
// slot for kind=potential.
struct Layout {
  int d = 2;
  bool potential = false;
  std::vector<std::vector<Family1D>> fams;  // [slot][dir]
  std::vector<int> comp;                    // per function (full kind)
  std::vector<std::array<int, 3>> multi;    // per function

  Index size() const { return static_cast<Index>(multi.size()); }
};

Layout make_layout(int d, int degree, BoundaryCondition bc, SpaceKind kind) {
  Layout lay;
  lay.d = d;
  lay.potential = (kind == SpaceKind::potential);
  if (kind == SpaceKind::full) {
    lay.fams.resize(d);
    for (int r = 0; r < d; ++r) {
      lay.fams[r].resize(d);
      for (int dir = 0; dir < d; ++dir)
        lay.fams[r][dir] = (bc == BoundaryCondition::normal_zero && dir == r)
                               ? family_bubble(degree)
                               : family_legendre(degree);
    }
    for (int r = 0; r < d; ++r) {
      std::array<int, 3> idx{0, 0, 0};
      while (true) {
        lay.comp.push_back(r);
        lay.multi.push_back(idx);
        int i = d - 1;
        for (; i >= 0; --i) {
          if (++idx[i] < lay.fams[r][i].size()) break;
          idx[i] = 0;
        }
        if (i < 0) break;
      }
    }
  } else {
    lay.fams.resize(1);
    lay.fams[0].resize(d);
    for (int dir = 0; dir < d; ++dir)
      lay.fams[0][dir] = (bc == BoundaryCondition::normal_zero)
                             ? family_neumann(degree)
                             : family_legendre(degree);
    std::array<int, 3> idx{0, 0, 0};
    while (true) {
      bool all_const = true;
      for (int i = 0; i < d; ++i) all_const = all_const && idx[i] == 0;
      if (!all_const) {  // gradients of constants vanish
        lay.comp.push_back(0);
        lay.multi.push_back(idx);
      }
      int i = d - 1;
      for (; i >= 0; --i) {
        if (++idx[i] < lay.fams[0][i].size()) break;
        idx[i] = 0;
      }
      if (i < 0) break;
    }
  }
  return lay;
}

// Per-point family evaluations up to third derivative, chain-rule scaled.
struct DirEval {
  // ev[slot][dir].row(order) has family-size entries
  std::vector<std::vector<std::array<VectorXd, 4>>> ev;
};

void eval_dirs(const Layout& lay, const Box& box, const Eigen::Ref<const Eigen::RowVectorXd>& x,
               bool need_third, DirEval& de) {
  const int d = lay.d;
  de.ev.resize(lay.fams.size());
  for (std::size_t s = 0; s < lay.fams.size(); ++s) {
    de.ev[s].resize(d);
    for (int dir = 0; dir < d; ++dir) {
      const double len = box.hi(dir) - box.lo(dir);
      const double scale = 2.0 / len;
      const double xi = (2.0 * x(dir) - box.lo(dir) - box.hi(dir)) / len;
      auto& e = de.ev[s][dir];
      VectorXd d3;
      lay.fams[s][dir].eval(xi, e[0], e[1], e[2], need_third ? &d3 : nullptr);
      e[1] *= scale;
      e[2] *= scale * scale;
      if (need_third)
        e[3] = d3 * (scale * scale * scale);
    }
  }
}

// Product over directions with prescribed derivative orders.
inline double dprod(const DirEval& de, int slot, const std::array<int, 3>& idx,
                    const int* orders, int d) {
  double p = 1.0;
  for (int i = 0; i < d; ++i) p *= de.ev[slot][i][orders[i]](idx[i]);
  return p;
}

}  // namespace

struct MapSpaceAccess {
  static void fill_constrained_tables(const MapSpace& s, const Layout& lay,
                                      const MatrixXd& points, MatrixXd* V, MatrixXd* G,
                                      MatrixXd* H) {
    const int d = lay.d;
    const Index P = points.rows();
    const Index n = lay.size();
    if (V) V->setZero(P * d, n);
    if (G) G->setZero(P * d * d, n);
    if (H) H->setZero(P * d * d * d, n);
#pragma omp parallel
    {
      DirEval de;
#pragma omp for schedule(static)
      for (Index q = 0; q < P; ++q) {
        eval_dirs(lay, s.box_, points.row(q), H != nullptr && lay.potential, de);
        for (Index j = 0; j < n; ++j) {
          const auto& idx = lay.multi[j];
          int orders[3] = {0, 0, 0};
          if (!lay.potential) {
            const int r = lay.comp[j];
            if (V) (*V)(q * d + r, j) = dprod(de, r, idx, orders, d);
            if (G)
              for (int c = 0; c < d; ++c) {
                orders[c] = 1;
                (*G)(q * d * d + r * d + c, j) = dprod(de, r, idx, orders, d);
                orders[c] = 0;
              }
            if (H)
              for (int i = 0; i < d; ++i)
                for (int l = 0; l < d; ++l) {
                  ++orders[i];
                  ++orders[l];
                  (*H)(q * d * d * d + r * d * d + i * d + l, j) =
                      dprod(de, r, idx, orders, d);
                  orders[i] = orders[l] = 0;
                }
          } else {
            // field = gradient of the scalar: component r uses one extra
            // derivative in direction r
            for (int r = 0; r < d; ++r) {
              orders[r] = 1;
              if (V) (*V)(q * d + r, j) = dprod(de, 0, idx, orders, d);
              if (G)
                for (int c = 0; c < d; ++c) {
                  ++orders[c];
                  (*G)(q * d * d + r * d + c, j) = dprod(de, 0, idx, orders, d);
                  --orders[c];
                }
              if (H)
                for (int i = 0; i < d; ++i)
                  for (int l = 0; l < d; ++l) {
                    ++orders[i];
                    ++orders[l];
                    (*H)(q * d * d * d + r * d * d + i * d + l, j) =
                        dprod(de, 0, idx, orders, d);
                    --orders[i];
                    --orders[l];
                  }
              orders[r] = 0;
            }
          }
        }
      }
    }
  }

  static Layout layout_of(const MapSpace& s) {
    return make_layout(s.box_.dim(), s.degree_, s.bc_, s.kind_);
  }
};

namespace {

VectorXd replicate_weights(const VectorXd& w, int times) {
  VectorXd out(w.size() * times);
  for (Index q = 0; q < w.size(); ++q)
    out.segment(q * times, times).setConstant(w(q));
  return out;
}

MatrixXd weighted_gram(const MatrixXd& A, const VectorXd& row_w) {
  return A.transpose() * row_w.asDiagonal() * A;
}

MatrixXd inv_sqrt_psd(const MatrixXd& G, double drop_rel, Index* kept) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (G + G.transpose()));
  const VectorXd& ev = es.eigenvalues();
  const double cutoff = drop_rel * ev.maxCoeff();
  std::vector<Index> keep;
  for (Index i = 0; i < ev.size(); ++i)
    if (ev(i) > cutoff) keep.push_back(i);
  MatrixXd T(G.rows(), static_cast<Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c)
    T.col(static_cast<Index>(c)) =
        es.eigenvectors().col(keep[c]) / std::sqrt(ev(keep[c]));
  if (kept) *kept = static_cast<Index>(keep.size());
  return T;
}

std::uint64_t fnv1a(const unsigned char* data, std::size_t n, std::uint64_t h) {
  for (std::size_t i = 0; i < n; ++i) {
    h ^= data[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace

MapSpace MapSpace::build(const Box& box, int n_lp, BoundaryCondition bc, SpaceKind kind) {
  if (n_lp < 2)
    throw InputError("map space: polynomial degree must be at least 2");
  MapSpace s;
  s.box_ = box;
  s.degree_ = n_lp;
  s.bc_ = bc;
  s.kind_ = kind;
  s.quad_ = box_quadrature(box, n_lp + 2);

  const Layout lay = MapSpaceAccess::layout_of(s);
  MatrixXd Vc, Gc, Hc;
  MapSpaceAccess::fill_constrained_tables(s, lay, s.quad_.points, &Vc, &Gc, &Hc);
  const int d = box.dim();
  const VectorXd wv = replicate_weights(s.quad_.weights, d);
  const VectorXd wg = replicate_weights(s.quad_.weights, d * d);
  const VectorXd wh = replicate_weights(s.quad_.weights, d * d * d);
  MatrixXd G = weighted_gram(Vc, wv) + weighted_gram(Gc, wg) + weighted_gram(Hc, wh);

  // Diagonal pre-scaling keeps the eigensolve well conditioned at high degree.
  VectorXd dscale = G.diagonal().cwiseSqrt().cwiseInverse();
  MatrixXd Gs = dscale.asDiagonal() * G * dscale.asDiagonal();
  Index kept = 0;
  MatrixXd T = dscale.asDiagonal() * inv_sqrt_psd(Gs, 1e-12, &kept);
  // Refinement passes until the Gram is identity to near machine precision.
  for (int pass = 0; pass < 3; ++pass) {
    MatrixXd G1 = T.transpose() * G * T;
    const double err = (G1 - MatrixXd::Identity(G1.rows(), G1.cols())).cwiseAbs().maxCoeff();
    if (err < 1e-13) break;
    T = T * inv_sqrt_psd(G1, 1e-12, nullptr);
  }
  s.basis_matrix_ = std::move(T);
  s.finalize();
  return s;
}

void MapSpace::finalize() {
  const Layout lay = MapSpaceAccess::layout_of(*this);
  if (quad_.points.rows() == 0) quad_ = box_quadrature(box_, degree_ + 2);
  MatrixXd Vc, Gc, Hc;
  MapSpaceAccess::fill_constrained_tables(*this, lay, quad_.points, &Vc, &Gc, &Hc);
  quad_values_.noalias() = Vc * basis_matrix_;
  quad_grads_.noalias() = Gc * basis_matrix_;
  MatrixXd Hq;
  Hq.noalias() = Hc * basis_matrix_;
  const int d = box_.dim();
  const VectorXd wv = replicate_weights(quad_.weights, d);
  const VectorXd wg = replicate_weights(quad_.weights, d * d);
  const VectorXd wh = replicate_weights(quad_.weights, d * d * d);
  seminorm_matrix_ = weighted_gram(Hq, wh) / box_.volume();
  h2_gram_ = weighted_gram(quad_values_, wv) + weighted_gram(quad_grads_, wg) +
             seminorm_matrix_ * box_.volume();

  std::uint64_t h = 0xcbf29ce484222325ull;
  const int meta[4] = {box_.dim(), degree_, static_cast<int>(bc_), static_cast<int>(kind_)};
  h = fnv1a(reinterpret_cast<const unsigned char*>(meta), sizeof(meta), h);
  h = fnv1a(reinterpret_cast<const unsigned char*>(box_.lo.data()),
            sizeof(double) * box_.lo.size(), h);
  h = fnv1a(reinterpret_cast<const unsigned char*>(box_.hi.data()),
            sizeof(double) * box_.hi.size(), h);
  h = fnv1a(reinterpret_cast<const unsigned char*>(basis_matrix_.data()),
            sizeof(double) * basis_matrix_.size(), h);
  checksum_ = h;
}

void MapSpace::eval_basis(const MatrixXd& points, MatrixXd* values, MatrixXd* grads,
                          MatrixXd* hessians) const {
  for (Index q = 0; q < points.rows(); ++q)
    if (!box_.contains(points.row(q).transpose(), 1e-9))
      throw NumericalError("eval_basis: point outside the box");
  const Layout lay = MapSpaceAccess::layout_of(*this);
  MatrixXd Vc, Gc, Hc;
  MapSpaceAccess::fill_constrained_tables(*this, lay, points, values ? &Vc : nullptr,
                                          grads ? &Gc : nullptr, hessians ? &Hc : nullptr);
  if (values) values->noalias() = Vc * basis_matrix_;
  if (grads) grads->noalias() = Gc * basis_matrix_;
  if (hessians) hessians->noalias() = Hc * basis_matrix_;
}

MapSpace MapSpace::subspace(const MatrixXd& modes) const {
  if (modes.rows() != size()) throw InputError("subspace: mode dimension mismatch");
  MapSpace s;
  s.box_ = box_;
  s.degree_ = degree_;
  s.bc_ = bc_;
  s.kind_ = kind_;
  s.quad_ = quad_;
  s.basis_matrix_ = basis_matrix_ * modes;
  s.finalize();
  return s;
}

void MapSpace::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write space file: " + path);
  const char magic[8] = {'G', 'R', 'R', 'S', 'P', 'C', '1', '\n'};
  out.write(magic, 8);
  const std::int64_t meta[5] = {box_.dim(), degree_, static_cast<int>(bc_),
                                static_cast<int>(kind_), 0};
  out.write(reinterpret_cast<const char*>(meta), sizeof(meta));
  out.write(reinterpret_cast<const char*>(box_.lo.data()), sizeof(double) * box_.lo.size());
  out.write(reinterpret_cast<const char*>(box_.hi.data()), sizeof(double) * box_.hi.size());
  const std::int64_t shape[2] = {basis_matrix_.rows(), basis_matrix_.cols()};
  out.write(reinterpret_cast<const char*>(shape), sizeof(shape));
  out.write(reinterpret_cast<const char*>(basis_matrix_.data()),
            sizeof(double) * basis_matrix_.size());
}

MapSpace MapSpace::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open space file: " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, "GRRSPC1\n", 8) != 0)
    throw InputError("not a space file: " + path);
  std::int64_t meta[5];
  in.read(reinterpret_cast<char*>(meta), sizeof(meta));
  const int d = static_cast<int>(meta[0]);
  MapSpace s;
  s.box_.lo.resize(d);
  s.box_.hi.resize(d);
  in.read(reinterpret_cast<char*>(s.box_.lo.data()), sizeof(double) * d);
  in.read(reinterpret_cast<char*>(s.box_.hi.data()), sizeof(double) * d);
  s.degree_ = static_cast<int>(meta[1]);
  s.bc_ = static_cast<BoundaryCondition>(meta[2]);
  s.kind_ = static_cast<SpaceKind>(meta[3]);
  std::int64_t shape[2];
  in.read(reinterpret_cast<char*>(shape), sizeof(shape));
  s.basis_matrix_.resize(shape[0], shape[1]);
  in.read(reinterpret_cast<char*>(s.basis_matrix_.data()),
          sizeof(double) * s.basis_matrix_.size());
  if (!in) throw InputError("truncated space file: " + path);
  s.finalize();
  return s;
}

MapEvalResult map_eval(const Mapping& phi, const MatrixXd& points, bool want_hessians) {
  const MapSpace& s = *phi.space;
  const int d = s.dim();
  const Index P = points.rows();
  MatrixXd V, G, H;
  s.eval_basis(points, &V, &G, want_hessians ? &H : nullptr);
  MapEvalResult out;
  const VectorXd v = V * phi.a;
  const VectorXd g = G * phi.a;
  out.values = points;
  out.grads.setZero(P, d * d);
  for (Index q = 0; q < P; ++q) {
    for (int r = 0; r < d; ++r) out.values(q, r) += v(q * d + r);
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c)
        out.grads(q, r * d + c) = g(q * d * d + r * d + c) + (r == c ? 1.0 : 0.0);
  }
  if (want_hessians) {
    const VectorXd h = H * phi.a;
    out.hessians.resize(P, d * d * d);
    for (Index q = 0; q < P; ++q)
      for (int i = 0; i < d * d * d; ++i) out.hessians(q, i) = h(q * d * d * d + i);
  }
  return out;
}

VectorXd jacobian_det(const Mapping& phi, const MatrixXd& points) {
  const MapSpace& s = *phi.space;
  MatrixXd G;
  s.eval_basis(points, nullptr, &G, nullptr);
  const VectorXd g = G * phi.a;
  const int dd = s.dim() * s.dim();
  RowMat gu(points.rows(), dd);
  for (Index q = 0; q < points.rows(); ++q)
    for (int i = 0; i < dd; ++i) gu(q, i) = g(q * dd + i);
  return det_of_map(gu);
}

double h2_inner(const Mapping& u, const Mapping& v) {
  if (u.space != v.space) throw InputError("h2_inner: mappings from different spaces");
  return u.a.dot(u.space->h2_gram() * v.a);
}

void save_mapping(const std::string& path, const Mapping& phi) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write mapping file: " + path);
  const char magic[8] = {'G', 'R', 'R', 'M', 'A', 'P', '1', '\n'};
  out.write(magic, 8);
  const std::uint64_t cs = phi.space->checksum();
  out.write(reinterpret_cast<const char*>(&cs), sizeof(cs));
  const std::int64_t m = phi.a.size();
  out.write(reinterpret_cast<const char*>(&m), sizeof(m));
  out.write(reinterpret_cast<const char*>(phi.a.data()), sizeof(double) * m);
}

VectorXd load_mapping_coeffs(const std::string& path, const MapSpace& space) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open mapping file: " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, "GRRMAP1\n", 8) != 0)
    throw InputError("not a mapping file: " + path);
  std::uint64_t cs = 0;
  in.read(reinterpret_cast<char*>(&cs), sizeof(cs));
  if (cs != space.checksum())
    throw InputError("mapping file " + path + " does not match the space checksum");
  std::int64_t m = 0;
  in.read(reinterpret_cast<char*>(&m), sizeof(m));
  if (m != space.size()) throw InputError("mapping size mismatch in " + path);
  VectorXd a(m);
  in.read(reinterpret_cast<char*>(a.data()), sizeof(double) * m);
  if (!in) throw InputError("truncated mapping file: " + path);
  return a;
}

}  // namespace grr
