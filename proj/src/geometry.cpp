#include "grr/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "grr/kernels.hpp"

namespace grr {

double SampledBoundary::perimeter() const {
  double acc = 0.0;
  const Index n = points.rows();
  for (Index i = 0; i < n; ++i)
    acc += (points.row((i + 1) % n) - points.row(i)).norm();
  return acc;
}

SampledBoundary SampledBoundary::circle(const Vector2d& center, double radius, int n) {
  SampledBoundary b;
  b.points.resize(n, 2);
  for (int i = 0; i < n; ++i) {
    const double t = 2.0 * 3.14159265358979323846 * i / n;
    b.points.row(i) << center.x() + radius * std::cos(t), center.y() + radius * std::sin(t);
  }
  return b;
}

namespace {

double point_segment_dist2(const Vector2d& p, const Vector2d& a, const Vector2d& b) {
  const Vector2d ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 <= 0.0) return (p - a).squaredNorm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).squaredNorm();
}

/// Uniform bucket grid over a fixed point set; expanding-ring nearest query.
class PointGrid {
 public:
  explicit PointGrid(const MatrixXd& pts) : pts_(pts) {
    lo_ = pts.colwise().minCoeff().transpose();
    hi_ = pts.colwise().maxCoeff().transpose();
    const double span = std::max(1e-300, (hi_ - lo_).maxCoeff());
    lo_.array() -= 1e-9 * span;
    hi_.array() += 1e-9 * span;
    n_ = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(pts.rows()) / 2.0)));
    cells_.assign(static_cast<std::size_t>(n_) * n_, {});
    for (Index i = 0; i < pts.rows(); ++i)
      cells_[cell_index(pts(i, 0), pts(i, 1))].push_back(static_cast<int>(i));
    cw_ = Vector2d((hi_.x() - lo_.x()) / n_, (hi_.y() - lo_.y()) / n_);
  }

  /// Index of the nearest point and its squared distance.
  std::pair<int, double> nearest(const Vector2d& p) const {
    const int ci = coord(p.x(), lo_.x(), hi_.x());
    const int cj = coord(p.y(), lo_.y(), hi_.y());
    int best = -1;
    double best2 = std::numeric_limits<double>::infinity();
    const double cell = std::min(cw_.x(), cw_.y());
    for (int ring = 0; ring < 2 * n_ + 2; ++ring) {
      for (int i = std::max(0, ci - ring); i <= std::min(n_ - 1, ci + ring); ++i)
        for (int j = std::max(0, cj - ring); j <= std::min(n_ - 1, cj + ring); ++j) {
          if (std::max(std::abs(i - ci), std::abs(j - cj)) != ring) continue;
          for (int idx : cells_[static_cast<std::size_t>(i) * n_ + j]) {
            const double d2 = (pts_.row(idx).transpose() - p).squaredNorm();
            if (d2 < best2) {
              best2 = d2;
              best = idx;
            }
          }
        }
      if (best >= 0 && best2 <= sq(ring * cell)) break;
    }
    return {best, best2};
  }

 private:
  int coord(double v, double lo, double hi) const {
    const int c = static_cast<int>((v - lo) / (hi - lo) * n_);
    return std::clamp(c, 0, n_ - 1);
  }
  std::size_t cell_index(double x, double y) const {
    return static_cast<std::size_t>(coord(x, lo_.x(), hi_.x())) * n_ +
           coord(y, lo_.y(), hi_.y());
  }

  const MatrixXd& pts_;
  Vector2d lo_, hi_, cw_;
  int n_;
  std::vector<std::vector<int>> cells_;
};

}  // namespace

double dist_point_set(const VectorXd& x, const SampledBoundary& s, bool segment_refine) {
  const Index n = s.points.rows();
  if (n < 3) throw InputError("boundary needs at least 3 samples");
  double best2 = std::numeric_limits<double>::infinity();
  Index best = 0;
  for (Index i = 0; i < n; ++i) {
    const double d2 = (s.points.row(i).transpose() - x).squaredNorm();
    if (d2 < best2) {
      best2 = d2;
      best = i;
    }
  }
  if (segment_refine && s.points.cols() == 2) {
    const Vector2d p = x.head<2>();
    for (Index off = 0; off < 2; ++off) {
      const Index i = (best + n - off) % n;
      best2 = std::min(best2, point_segment_dist2(p, s.points.row(i).transpose(),
                                                  s.points.row((i + 1) % n).transpose()));
    }
  }
  return std::sqrt(best2);
}

double hausdorff(const MatrixXd& u, const MatrixXd& v) {
  const double a = min_nn_dist2(u, v).maxCoeff();
  const double b = min_nn_dist2(v, u).maxCoeff();
  return std::sqrt(std::max(a, b));
}

double dist_bnd(const MatrixXd& u_boundary, const MatrixXd& v_boundary) {
  return std::sqrt(min_nn_dist2(u_boundary, v_boundary).maxCoeff());
}

double epsilon_cover(const MatrixXd& points, const SampledBoundary& boundary) {
  return std::sqrt(min_nn_dist2(boundary.points, points).maxCoeff());
}

double geo_error_points(const MatrixXd& mapped, const MatrixXd& test_curve) {
  return std::sqrt(min_nn_dist2(mapped, test_curve).maxCoeff());
}

double geo_error(const Mapping& phi, const MatrixXd& x_pts, const MatrixXd& test_curve) {
  return geo_error_points(map_eval(phi, x_pts).values, test_curve);
}

TubeAreaResult tube_area(const SampledBoundary& boundary, double delta, long n_mc,
                         std::uint64_t seed) {
  if (delta <= 0.0) throw InputError("tube_area: delta must be positive");
  if (boundary.points.cols() != 2) throw InputError("tube_area: d=2 only");
  const Vector2d lo = boundary.points.colwise().minCoeff().transpose().array() - 1.05 * delta;
  const Vector2d hi = boundary.points.colwise().maxCoeff().transpose().array() + 1.05 * delta;
  const double box_area = (hi.x() - lo.x()) * (hi.y() - lo.y());
  const PointGrid grid(boundary.points);
  const Index n = boundary.points.rows();
  // Segment half-length bound for deciding when projection refinement is
  // needed near the shell boundary.
  double max_seg = 0.0;
  for (Index i = 0; i < n; ++i)
    max_seg = std::max(max_seg,
                       (boundary.points.row((i + 1) % n) - boundary.points.row(i)).norm());

  Rng rng(seed);
  long hits = 0;
  for (long s = 0; s < n_mc; ++s) {
    const Vector2d p(rng.uniform(lo.x(), hi.x()), rng.uniform(lo.y(), hi.y()));
    auto [idx, d2] = grid.nearest(p);
    double dist = std::sqrt(d2);
    if (std::abs(dist - delta) <= max_seg) {
      double best2 = d2;
      for (Index off = 0; off < 2; ++off) {
        const Index i = (idx + n - off) % n;
        best2 = std::min(best2, point_segment_dist2(p, boundary.points.row(i).transpose(),
                                                    boundary.points.row((i + 1) % n).transpose()));
      }
      dist = std::sqrt(best2);
    }
    if (dist < delta) ++hits;
  }
  TubeAreaResult r;
  const double frac = static_cast<double>(hits) / static_cast<double>(n_mc);
  r.estimate = frac * box_area;
  r.std_error = box_area * std::sqrt(std::max(frac * (1.0 - frac), 1e-300) / n_mc);
  r.bound = 2.0 * delta * boundary.perimeter();
  r.n_samples = n_mc;
  return r;
}

namespace {

double corner_envelope(double alpha, double t) {
  const double sa = std::sin(alpha), ca = std::cos(alpha), ta = std::tan(alpha);
  const double b1 = std::sqrt(sq(1.0 / sa - t) + sq(ta * t));
  const double b2 = ca > 0.0 ? t / ca : std::numeric_limits<double>::infinity();
  const double b3 = 1.0 + 2.0 * sa * t;
  return std::min({b1, b2, b3});
}

}  // namespace

double corner_constant(double alpha) {
  const double pi = 3.14159265358979323846;
  if (!(alpha > 0.0) || alpha > 0.5 * pi + 1e-12)
    throw InputError("corner_constant: alpha must lie in (0, pi/2]");
  const double sa = std::sin(alpha);
  const double T = 1.0 / sa - sa;
  if (T <= 0.0) return 0.0;  // alpha = pi/2: the feasible interval degenerates
  const int n_grid = 10000;
  double best_t = 0.0, best = -1.0;
  for (int i = 0; i <= n_grid; ++i) {
    const double t = T * i / n_grid;
    const double v = corner_envelope(alpha, t);
    if (v > best) {
      best = v;
      best_t = t;
    }
  }
  // golden-section refinement around the grid maximizer
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = std::max(0.0, best_t - T / n_grid);
  double b = std::min(T, best_t + T / n_grid);
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = corner_envelope(alpha, c), fd = corner_envelope(alpha, d);
  for (int it = 0; it < 200 && b - a > 1e-14 * (1.0 + T); ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = corner_envelope(alpha, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = corner_envelope(alpha, d);
    }
  }
  return std::max(best, corner_envelope(alpha, 0.5 * (a + b)));
}

Prop31Report verify_prop31(const Mapping& phi, const MatrixXd& omega_boundary,
                           const MatrixXd& v_boundary, const MatrixXd& x_pts,
                           const MatrixXd& y_pts) {
  Prop31Report rep;
  const auto dense = map_eval(phi, omega_boundary);
  rep.lhs = dist_bnd(dense.values, v_boundary);

  const int d = phi.space->dim();
  double kmax = 0.0;
  for (Index q = 0; q < omega_boundary.rows(); ++q) {
    MatrixXd A(d, d);
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) A(r, c) = dense.grads(q, r * d + c);
    Eigen::JacobiSVD<MatrixXd> svd(A);
    kmax = std::max(kmax, svd.singularValues()(0));
  }
  rep.lipschitz_k = kmax;

  rep.eps_cover = std::sqrt(min_nn_dist2(omega_boundary, x_pts).maxCoeff());

  const auto mapped = map_eval(phi, x_pts);
  rep.max_pair_err = (mapped.values - y_pts).rowwise().norm().maxCoeff();
  rep.rhs = rep.max_pair_err + rep.lipschitz_k * rep.eps_cover;
  return rep;
}

}  // namespace grr
