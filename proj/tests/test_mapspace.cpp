#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "grr/mapspace.hpp"
#include "test_helpers.hpp"

using namespace grr;
using grr::testing::random_cloud;
using grr::testing::random_vector;

namespace {

MatrixXd interior_points(const Box& box, Index n, std::uint64_t seed) {
  Rng rng(seed);
  MatrixXd p(n, box.dim());
  for (Index i = 0; i < n; ++i)
    for (int j = 0; j < box.dim(); ++j)
      p(i, j) = box.lo(j) + (0.05 + 0.9 * rng.uniform()) * (box.hi(j) - box.lo(j));
  return p;
}

// quadrature Gram assembled independently of the space's own bookkeeping
MatrixXd gram_oracle(const MapSpace& s) {
  const BoxQuad q = box_quadrature(s.box(), s.degree() + 2);
  MatrixXd V, G, H;
  s.eval_basis(q.points, &V, &G, &H);
  const int d = s.dim();
  MatrixXd gram = MatrixXd::Zero(s.size(), s.size());
  for (Index p = 0; p < q.points.rows(); ++p) {
    gram.noalias() +=
        q.weights(p) * (V.middleRows(p * d, d).transpose() * V.middleRows(p * d, d));
    gram.noalias() += q.weights(p) * (G.middleRows(p * d * d, d * d).transpose() *
                                      G.middleRows(p * d * d, d * d));
    gram.noalias() += q.weights(p) * (H.middleRows(p * d * d * d, d * d * d).transpose() *
                                      H.middleRows(p * d * d * d, d * d * d));
  }
  return gram;
}

}  // namespace

TEST_CASE("dimension formulas for degrees 2..6, both boundary settings") {
  const Box box = Box::square(0.0, 1.0);
  for (int n = 2; n <= 6; ++n) {
    const auto full = MapSpace::build(box, n, BoundaryCondition::none, SpaceKind::full);
    CHECK(full.size() == 2 * (n + 1) * (n + 1));
    const auto con = MapSpace::build(box, n, BoundaryCondition::normal_zero, SpaceKind::full);
    CHECK(con.size() == 2 * (n + 1) * (n + 1) - 4 * (n + 1));
  }
  // the worked example: unit square, degree 3
  const auto s = MapSpace::build(box, 3, BoundaryCondition::normal_zero, SpaceKind::full);
  CHECK(s.size() == 16);
  const auto sn = MapSpace::build(box, 3, BoundaryCondition::none, SpaceKind::full);
  CHECK(sn.size() == 32);
}

TEST_CASE("degree below two is a configuration error") {
  CHECK_THROWS_AS(
      MapSpace::build(Box::square(0, 1), 1, BoundaryCondition::normal_zero, SpaceKind::full),
      InputError);
}

TEST_CASE("orthonormality holds at high degree") {
  const Box box = Box::square(-2.0, 2.0);
  for (int n : {6, 15, 25}) {
    const auto s = MapSpace::build(box, n, BoundaryCondition::normal_zero, SpaceKind::full);
    const MatrixXd gram = gram_oracle(s);
    const double err =
        (gram - MatrixXd::Identity(s.size(), s.size())).cwiseAbs().maxCoeff();
    INFO("degree ", n, " gram error ", err);
    CHECK(err < 1e-10);
  }
}

TEST_CASE("normal component vanishes on the box faces") {
  const Box box = Box::square(0.0, 1.0);
  const auto s = MapSpace::build(box, 8, BoundaryCondition::normal_zero, SpaceKind::full);
  const MatrixXd samples = box_boundary_samples(box, 50);
  MatrixXd V;
  s.eval_basis(samples, &V, nullptr, nullptr);
  // sample blocks: bottom, top (normal e2), then left, right (normal e1)
  double worst = 0.0;
  for (Index m = 0; m < s.size(); ++m)
    for (Index i = 0; i < samples.rows(); ++i) {
      const int face = static_cast<int>(i / 50);
      const int normal_comp = face < 2 ? 1 : 0;
      worst = std::max(worst, std::abs(V(i * 2 + normal_comp, m)));
    }
  CHECK(worst < 1e-10);

  // arbitrary coefficients inherit the invariance
  Mapping phi(s, random_vector(s.size(), 77, 2.0));
  const auto ev = map_eval(phi, samples);
  double worst_u = 0.0;
  for (Index i = 0; i < samples.rows(); ++i) {
    const int face = static_cast<int>(i / 50);
    const int nc = face < 2 ? 1 : 0;
    worst_u = std::max(worst_u, std::abs(ev.values(i, nc) - samples(i, nc)));
  }
  CHECK(worst_u < 1e-9);
}

TEST_CASE("map_eval identities") {
  const Box box = Box::square(0.0, 1.0);
  const auto s = MapSpace::build(box, 5, BoundaryCondition::normal_zero, SpaceKind::full);
  const MatrixXd pts = interior_points(box, 20, 5);

  SUBCASE("zero coefficients give the identity map") {
    Mapping id(s);
    const auto ev = map_eval(id, pts, true);
    CHECK((ev.values - pts).cwiseAbs().maxCoeff() < 1e-14);
    for (Index q = 0; q < pts.rows(); ++q) {
      CHECK(ev.grads(q, 0) == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(ev.grads(q, 3) == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(std::abs(ev.grads(q, 1)) < 1e-14);
      CHECK(std::abs(ev.grads(q, 2)) < 1e-14);
    }
    CHECK(ev.hessians.cwiseAbs().maxCoeff() < 1e-13);
    CHECK((jacobian_det(id, pts).array() - 1.0).abs().maxCoeff() < 1e-13);
  }

  SUBCASE("unit coefficient reproduces one basis field") {
    MatrixXd V;
    s.eval_basis(pts, &V, nullptr, nullptr);
    for (Index m : {Index(0), s.size() / 2, s.size() - 1}) {
      VectorXd a = VectorXd::Zero(s.size());
      a(m) = 1.0;
      const auto ev = map_eval(Mapping(s, a), pts);
      for (Index q = 0; q < pts.rows(); ++q)
        for (int r = 0; r < 2; ++r)
          CHECK(ev.values(q, r) - pts(q, r) ==
                doctest::Approx(V(q * 2 + r, m)).epsilon(1e-13));
    }
  }

  SUBCASE("gradients match centered finite differences") {
    Mapping phi(s, random_vector(s.size(), 301, 0.5));
    const auto ev = map_eval(phi, pts, true);
    const double h = 1e-5;
    for (Index q = 0; q < pts.rows(); ++q) {
      for (int c = 0; c < 2; ++c) {
        MatrixXd pp = pts.row(q), pm = pts.row(q);
        pp(0, c) += h;
        pm(0, c) -= h;
        const auto evp = map_eval(phi, pp), evm = map_eval(phi, pm);
        for (int r = 0; r < 2; ++r) {
          const double fd = (evp.values(0, r) - evm.values(0, r)) / (2.0 * h);
          CHECK(ev.grads(q, r * 2 + c) == doctest::Approx(fd).epsilon(1e-6));
        }
      }
    }
  }

  SUBCASE("hessians match finite differences of gradients") {
    Mapping phi(s, random_vector(s.size(), 302, 0.5));
    const auto ev = map_eval(phi, pts, true);
    const double h = 1e-5;
    for (Index q = 0; q < 5; ++q)
      for (int i = 0; i < 2; ++i) {
        MatrixXd pp = pts.row(q), pm = pts.row(q);
        pp(0, i) += h;
        pm(0, i) -= h;
        const auto evp = map_eval(phi, pp), evm = map_eval(phi, pm);
        for (int r = 0; r < 2; ++r)
          for (int j = 0; j < 2; ++j) {
            const double fd = (evp.grads(0, r * 2 + j) - evm.grads(0, r * 2 + j)) / (2 * h);
            CHECK(ev.hessians(q, r * 4 + i * 2 + j) == doctest::Approx(fd).epsilon(2e-5));
          }
      }
  }

  SUBCASE("points outside the box are a domain error") {
    MatrixXd bad(1, 2);
    bad << 1.5, 0.5;
    Mapping id(s);
    CHECK_THROWS_AS(map_eval(id, bad), NumericalError);
  }
}

TEST_CASE("jacobian determinant of a uniform dilation") {
  const Box box = Box::square(-1.0, 1.0);
  const auto s = MapSpace::build(box, 4, BoundaryCondition::none, SpaceKind::full);
  // coefficients for u = scale * id, fitted on the quadrature values
  const double scale = 0.17;
  MatrixXd V;
  s.eval_basis(s.quad().points, &V, nullptr, nullptr);
  VectorXd target(V.rows());
  for (Index q = 0; q < s.quad().points.rows(); ++q)
    for (int r = 0; r < 2; ++r) target(q * 2 + r) = scale * s.quad().points(q, r);
  const VectorXd a = V.colPivHouseholderQr().solve(target);
  CHECK((V * a - target).cwiseAbs().maxCoeff() < 1e-10);  // dilation is in the space
  const MatrixXd pts = interior_points(box, 30, 6);
  const VectorXd dets = jacobian_det(Mapping(s, a), pts);
  CHECK((dets.array() - sq(1.0 + scale)).abs().maxCoeff() < 1e-9);
}

TEST_CASE("jacobian minimum matches a brute-force grid scan") {
  const Box box = Box::square(0.0, 1.0);
  const auto s = MapSpace::build(box, 4, BoundaryCondition::normal_zero, SpaceKind::full);
  Mapping phi(s, random_vector(s.size(), 99, 0.05));
  const int n = 100;
  MatrixXd grid(n * n, 2);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) grid.row(i * n + j) << (i + 0.5) / n, (j + 0.5) / n;
  const double jmin = jacobian_det(phi, grid).minCoeff();
  // oracle: determinants from finite-difference gradients on a subsample
  double oracle = std::numeric_limits<double>::infinity();
  const double h = 1e-6;
  for (Index q = 0; q < grid.rows(); q += 37) {
    Matrix2d g;
    for (int c = 0; c < 2; ++c) {
      MatrixXd pp = grid.row(q), pm = grid.row(q);
      pp(0, c) += h;
      pm(0, c) -= h;
      const auto evp = map_eval(phi, pp), evm = map_eval(phi, pm);
      for (int r = 0; r < 2; ++r) g(r, c) = (evp.values(0, r) - evm.values(0, r)) / (2 * h);
    }
    oracle = std::min(oracle, g.determinant());
  }
  CHECK(jmin <= oracle + 1e-8);
}

TEST_CASE("h2 inner product") {
  const Box box = Box::square(0.0, 1.0);
  const auto s = MapSpace::build(box, 4, BoundaryCondition::normal_zero, SpaceKind::full);

  SUBCASE("basis orthonormality through h2_inner") {
    for (Index m = 0; m < s.size(); m += 3)
      for (Index k = 0; k < s.size(); k += 5) {
        VectorXd am = VectorXd::Zero(s.size()), ak = VectorXd::Zero(s.size());
        am(m) = 1.0;
        ak(k) = 1.0;
        const double v = h2_inner(Mapping(s, am), Mapping(s, ak));
        CHECK(v == doctest::Approx(m == k ? 1.0 : 0.0).epsilon(1e-10));
      }
  }

  SUBCASE("norm positivity") {
    Mapping u(s, random_vector(s.size(), 41));
    CHECK(h2_inner(u, u) > 0.0);
    Mapping z(s);
    CHECK(h2_inner(z, z) == doctest::Approx(0.0));
  }

  SUBCASE("agrees with a dense-grid trapezoid approximation") {
    Mapping u(s, random_vector(s.size(), 42, 0.3));
    const int n = 600;
    const double h = 1.0 / n;
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {  // evaluate one grid line at a time
      MatrixXd line(n + 1, 2);
      for (int j = 0; j <= n; ++j) line.row(j) << i * h, j * h;
      const auto ev = map_eval(u, line, true);
      const double wx = (i == 0 || i == n) ? 0.5 : 1.0;
      for (int j = 0; j <= n; ++j) {
        double term = 0.0;
        for (int r = 0; r < 2; ++r) {
          term += sq(ev.values(j, r) - line(j, r));
          for (int c = 0; c < 2; ++c)
            term += sq(ev.grads(j, r * 2 + c) - (r == c ? 1.0 : 0.0));
          for (int c = 0; c < 4; ++c) term += sq(ev.hessians(j, r * 4 + c));
        }
        const double wy = (j == 0 || j == n) ? 0.5 : 1.0;
        acc += wx * wy * term * h * h;
      }
    }
    CHECK(h2_inner(u, u) == doctest::Approx(acc).epsilon(1e-4));
  }
}

TEST_CASE("potential space: curl-free fields with vanishing normal component") {
  const Box box = Box::square(0.0, 1.0);
  const auto s = MapSpace::build(box, 6, BoundaryCondition::normal_zero, SpaceKind::potential);
  CHECK(s.size() == (6 - 1) * (6 - 1) - 1);

  const MatrixXd pts = interior_points(box, 100, 55);
  MatrixXd G;
  s.eval_basis(pts, nullptr, &G, nullptr);
  double worst_curl = 0.0;
  for (Index m = 0; m < s.size(); ++m)
    for (Index q = 0; q < pts.rows(); ++q)
      worst_curl =
          std::max(worst_curl, std::abs(G(q * 4 + 1 * 2 + 0, m) - G(q * 4 + 0 * 2 + 1, m)));
  CHECK(worst_curl < 1e-10);

  const MatrixXd samples = box_boundary_samples(box, 50);
  MatrixXd V;
  s.eval_basis(samples, &V, nullptr, nullptr);
  double worst = 0.0;
  for (Index m = 0; m < s.size(); ++m)
    for (Index i = 0; i < samples.rows(); ++i) {
      const int face = static_cast<int>(i / 50);
      const int nc = face < 2 ? 1 : 0;
      worst = std::max(worst, std::abs(V(i * 2 + nc, m)));
    }
  CHECK(worst < 1e-10);

  const MatrixXd gram = gram_oracle(s);
  CHECK((gram - MatrixXd::Identity(s.size(), s.size())).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("space and mapping serialization round trip") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "grr_space_io";
  fs::create_directories(dir);
  const Box box = Box::square(-2.0, 2.0);
  const auto s = MapSpace::build(box, 4, BoundaryCondition::normal_zero, SpaceKind::full);
  const auto spath = (dir / "space.bin").string();
  s.save(spath);
  const auto loaded = MapSpace::load(spath);
  CHECK(loaded.size() == s.size());
  CHECK(loaded.checksum() == s.checksum());
  const MatrixXd pts = interior_points(box, 7, 8);
  MatrixXd V1, V2;
  s.eval_basis(pts, &V1, nullptr, nullptr);
  loaded.eval_basis(pts, &V2, nullptr, nullptr);
  CHECK((V1 - V2).cwiseAbs().maxCoeff() == 0.0);

  Mapping phi(s, random_vector(s.size(), 3));
  const auto mpath = (dir / "phi.map").string();
  save_mapping(mpath, phi);
  const VectorXd back = load_mapping_coeffs(mpath, loaded);
  CHECK((back - phi.a).cwiseAbs().maxCoeff() == 0.0);

  // checksum guards against loading into a mismatched space
  const auto other = MapSpace::build(box, 5, BoundaryCondition::normal_zero, SpaceKind::full);
  CHECK_THROWS_AS(load_mapping_coeffs(mpath, other), InputError);
}
