#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "grr/geometry.hpp"
#include "test_helpers.hpp"

using namespace grr;
using grr::testing::random_cloud;
using grr::testing::random_vector;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("dist_point_set") {
  const auto circle = SampledBoundary::circle({0, 0}, 1.0, 10000);
  SUBCASE("a sample itself is at distance zero") {
    CHECK(dist_point_set(circle.points.row(17).transpose(), circle) == 0.0);
  }
  SUBCASE("origin to the unit circle") {
    VectorXd origin = VectorXd::Zero(2);
    CHECK(std::abs(dist_point_set(origin, circle) - 1.0) < 1e-4);
  }
  SUBCASE("matches the brute-force loop without refinement") {
    Rng rng(3);
    for (int t = 0; t < 20; ++t) {
      VectorXd p(2);
      p << rng.uniform(-2, 2), rng.uniform(-2, 2);
      double best = std::numeric_limits<double>::infinity();
      for (Index i = 0; i < circle.points.rows(); ++i)
        best = std::min(best, (circle.points.row(i).transpose() - p).norm());
      CHECK(dist_point_set(p, circle, false) == doctest::Approx(best).epsilon(1e-15));
    }
  }
}

TEST_CASE("hausdorff distance") {
  const auto a = SampledBoundary::circle({0, 0}, 1.0, 4000).points;
  SUBCASE("identical sets") { CHECK(hausdorff(a, a) == 0.0); }
  SUBCASE("concentric circles") {
    const auto b = SampledBoundary::circle({0, 0}, 1.1, 4000).points;
    CHECK(std::abs(hausdorff(a, b) - 0.1) < 1e-3);
  }
  SUBCASE("symmetry is exact") {
    const MatrixXd u = random_cloud(300, 2, 1);
    const MatrixXd v = random_cloud(200, 2, 2);
    CHECK(hausdorff(u, v) == hausdorff(v, u));
  }
}

TEST_CASE("directed boundary distance is asymmetric") {
  // offset circles: radius 1 at origin vs radius 1 at (0.5, 0)
  const auto a = SampledBoundary::circle({0, 0}, 1.0, 8000).points;
  const auto b = SampledBoundary::circle({0.5, 0}, 1.0, 8000).points;
  const double ab = dist_bnd(a, b);
  const double ba = dist_bnd(b, a);
  // oracle by dense double loop on coarser samples
  auto oracle = [](const MatrixXd& u, const MatrixXd& v) {
    double worst = 0.0;
    for (Index i = 0; i < u.rows(); i += 7) {
      double best = std::numeric_limits<double>::infinity();
      for (Index j = 0; j < v.rows(); ++j) best = std::min(best, (u.row(i) - v.row(j)).norm());
      worst = std::max(worst, best);
    }
    return worst;
  };
  CHECK(ab == doctest::Approx(oracle(a, b)).epsilon(1e-6));
  CHECK(std::abs(ab - ba) < 1e-6);  // congruent circles: symmetric by chance
  // a small circle inside a big one: directed distances differ
  const auto small_c = SampledBoundary::circle({0.3, 0}, 0.2, 4000).points;
  const auto big_c = SampledBoundary::circle({0, 0}, 1.0, 4000).points;
  const double sb = dist_bnd(small_c, big_c);
  const double bs = dist_bnd(big_c, small_c);
  CHECK(sb != doctest::Approx(bs).epsilon(1e-3));
  // sup over the small circle of the gap to the big rim: 1 - 0.1 = 0.9
  CHECK(sb == doctest::Approx(0.9).epsilon(1e-3));
  // sup over the big circle: from (-1,0) to the small circle, 1.3 - 0.2
  CHECK(bs == doctest::Approx(1.1).epsilon(1e-3));
}

TEST_CASE("hausdorff dominates each directed component") {
  const MatrixXd u = random_cloud(150, 2, 5);
  const MatrixXd v = random_cloud(170, 2, 6);
  const double h = hausdorff(u, v);
  CHECK(h + 1e-15 >= dist_bnd(u, v));
  CHECK(h + 1e-15 >= dist_bnd(v, u));
}

TEST_CASE("epsilon cover of equispaced circle points") {
  const auto dense = SampledBoundary::circle({0, 0}, 1.0, 20000);
  SUBCASE("the samples cover themselves") {
    CHECK(epsilon_cover(dense.points, dense) == 0.0);
  }
  SUBCASE("100 equispaced points: half-chord of the arc") {
    const auto coarse = SampledBoundary::circle({0, 0}, 1.0, 100).points;
    const double eps = epsilon_cover(coarse, dense);
    CHECK(eps == doctest::Approx(std::sin(kPi / 100.0)).epsilon(1e-3));
  }
  SUBCASE("adding points never increases the cover radius") {
    double prev = std::numeric_limits<double>::infinity();
    for (int n : {25, 50, 100, 200}) {
      const double eps = epsilon_cover(SampledBoundary::circle({0, 0}, 1.0, n).points, dense);
      CHECK(eps <= prev + 1e-15);
      prev = eps;
    }
  }
}

TEST_CASE("distances are rigid-motion invariant") {
  Rng rng(11);
  const MatrixXd u = random_cloud(120, 2, 7);
  const MatrixXd v = random_cloud(140, 2, 8);
  const double h0 = hausdorff(u, v);
  const double d0 = dist_bnd(u, v);
  for (int trial = 0; trial < 5; ++trial) {
    const double th = rng.uniform(0, 2 * kPi);
    Matrix2d R;
    R << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
    Eigen::RowVector2d b(rng.uniform(-3, 3), rng.uniform(-3, 3));
    MatrixXd ur = u * R.transpose();
    ur.rowwise() += b;
    MatrixXd vr = v * R.transpose();
    vr.rowwise() += b;
    CHECK(std::abs(hausdorff(ur, vr) - h0) < 1e-10);
    CHECK(std::abs(dist_bnd(ur, vr) - d0) < 1e-10);
  }
}

TEST_CASE("tube area of the unit circle") {
  const auto circle = SampledBoundary::circle({0, 0}, 1.0, 10000);
  const double delta = 0.1;
  const auto r = tube_area(circle, delta, 400000);
  // exact annulus area pi((1.1)^2 - (0.9)^2) = 0.4 pi; the bound is equal
  const double exact = 0.4 * kPi;
  CHECK(r.bound == doctest::Approx(2.0 * delta * circle.perimeter()).epsilon(1e-12));
  CHECK(std::abs(r.bound - exact) < 1e-4);  // perimeter of the sample polygon
  CHECK(std::abs(r.estimate - exact) <= 3.0 * r.std_error);
  // vanishing delta gives vanishing area
  const auto tiny = tube_area(circle, 1e-4, 50000);
  CHECK(tiny.estimate < 0.01);
  // reproducibility with the fixed seed
  const auto again = tube_area(circle, delta, 400000);
  CHECK(again.estimate == r.estimate);
}

TEST_CASE("corner constant") {
  SUBCASE("value one at the quarter-angle corner") {
    CHECK(corner_constant(kPi / 4.0) == doctest::Approx(1.0).epsilon(1e-6));
  }
  SUBCASE("bounded by min(3, 1/sin) and monotone non-increasing over a sweep") {
    double prev = std::numeric_limits<double>::infinity();
    for (int i = 1; i <= 50; ++i) {
      const double alpha = 0.5 * kPi * i / 50.0;
      const double c = corner_constant(alpha);
      CHECK(c <= std::min(3.0, 1.0 / std::sin(alpha)) + 1e-9);
      CHECK(c <= prev + 1e-9);
      prev = c;
    }
  }
  SUBCASE("refined value is self-consistent against an independent maximizer") {
    for (double alpha : {0.3, 0.7, 1.1}) {
      const double c = corner_constant(alpha);
      const double sa = std::sin(alpha);
      const double T = 1.0 / sa - sa;
      auto envelope = [&](double t) {
        const double b1 = std::sqrt(sq(1.0 / sa - t) + sq(std::tan(alpha) * t));
        const double b2 = t / std::cos(alpha);
        const double b3 = 1.0 + 2.0 * sa * t;
        return std::min({b1, b2, b3});
      };
      // oracle: much finer scan plus golden-section refinement
      const int n = 200000;
      double best = 0.0, best_t = 0.0;
      for (int i = 0; i <= n; ++i) {
        const double t = T * i / n;
        const double v = envelope(t);
        if (v > best) {
          best = v;
          best_t = t;
        }
      }
      double a = std::max(0.0, best_t - T / n), b = std::min(T, best_t + T / n);
      const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
      double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
      double f1 = envelope(x1), f2 = envelope(x2);
      for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
        if (f1 > f2) {
          b = x2;
          x2 = x1;
          f2 = f1;
          x1 = b - gr * (b - a);
          f1 = envelope(x1);
        } else {
          a = x1;
          x1 = x2;
          f1 = f2;
          x2 = a + gr * (b - a);
          f2 = envelope(x2);
        }
      }
      const double oracle = std::max(best, envelope(0.5 * (a + b)));
      CHECK(std::abs(c - oracle) < 1e-6);
    }
  }
  SUBCASE("domain errors") {
    CHECK_THROWS_AS(corner_constant(0.0), InputError);
    CHECK_THROWS_AS(corner_constant(2.0), InputError);
  }
}

TEST_CASE("covering bound report on the identity map") {
  const auto s =
      MapSpace::build(Box::square(-2.0, 2.0), 4, BoundaryCondition::normal_zero, SpaceKind::full);
  Mapping id(s);
  const MatrixXd dense = SampledBoundary::circle({0, 0}, 1.0, 2000).points;
  const MatrixXd coarse = SampledBoundary::circle({0, 0}, 1.0, 40).points;
  const auto rep = verify_prop31(id, dense, dense, coarse, coarse);
  CHECK(rep.lhs == doctest::Approx(0.0));
  CHECK(rep.max_pair_err == doctest::Approx(0.0));
  CHECK(rep.lipschitz_k == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(rep.holds());
  // the pair bound dominated by sqrt(d) times the infinity misfit
  const MatrixXd y = coarse;
  const auto s2 = map_eval(id, coarse);
  double inf_misfit = 0.0;
  for (Index i = 0; i < coarse.rows(); ++i)
    for (int c = 0; c < 2; ++c)
      inf_misfit = std::max(inf_misfit, std::abs(s2.values(i, c) - y(i, c)));
  CHECK(rep.max_pair_err <= std::sqrt(2.0) * inf_misfit + 1e-15);
}
