#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "grr/experiments.hpp"
#include "grr/geometry.hpp"
#include "grr/registration.hpp"
#include "test_helpers.hpp"

using namespace grr;
using grr::testing::random_cloud;
using grr::testing::random_vector;

namespace {

MatrixXd circle_cloud(int n, double radius, const Vector2d& center) {
  MatrixXd out(n, 2);
  for (int i = 0; i < n; ++i) {
    const double t = 2.0 * 3.14159265358979323846 * i / n;
    out.row(i) << center.x() + radius * std::cos(t), center.y() + radius * std::sin(t);
  }
  return out;
}

}  // namespace

TEST_CASE("assemble_Bz stacking and identities") {
  const Box box = Box::square(0.0, 1.0);
  const auto s = MapSpace::build(box, 4, BoundaryCondition::normal_zero, SpaceKind::full);

  SUBCASE("single point: z carries both components, component-major") {
    MatrixXd x(1, 2), y(1, 2);
    x << 0.3, 0.4;
    y << 0.7, 0.2;
    const auto sys = assemble_Bz(s, x, y);
    CHECK(sys.z(0) == 0.7);
    CHECK(sys.z(1) == 0.2);
    CHECK(sys.offset(0) == 0.3);
    CHECK(sys.offset(1) == 0.4);
  }

  SUBCASE("identity coefficients: residual equals x minus y, stacked") {
    const MatrixXd x = random_cloud(6, 2, 1, 0.1, 0.9);
    const MatrixXd y = random_cloud(6, 2, 2, 0.1, 0.9);
    const auto sys = assemble_Bz(s, x, y);
    const VectorXd r = sys.B * VectorXd::Zero(s.size()) + sys.offset - sys.z;
    for (int c = 0; c < 2; ++c)
      for (Index i = 0; i < 6; ++i)
        CHECK(r(c * 6 + i) == doctest::Approx(x(i, c) - y(i, c)));
  }

  SUBCASE("residual infinity norm matches the per-point loop oracle exactly") {
    const MatrixXd x = random_cloud(9, 2, 3, 0.1, 0.9);
    const MatrixXd y = random_cloud(9, 2, 4, 0.1, 0.9);
    const auto sys = assemble_Bz(s, x, y);
    const VectorXd a = random_vector(s.size(), 5, 0.1);
    const VectorXd r = sys.B * a + sys.offset - sys.z;
    const auto ev = map_eval(Mapping(s, a), x);
    double oracle = 0.0;
    for (Index i = 0; i < 9; ++i)
      for (int c = 0; c < 2; ++c)
        oracle = std::max(oracle, std::abs(ev.values(i, c) - y(i, c)));
    CHECK(r.cwiseAbs().maxCoeff() == doctest::Approx(oracle).epsilon(1e-15));
  }

  SUBCASE("points outside the box are rejected") {
    MatrixXd x(1, 2), y(1, 2);
    x << 1.4, 0.4;
    y << 0.7, 0.2;
    CHECK_THROWS_AS(assemble_Bz(s, x, y), NumericalError);
  }
}

TEST_CASE("register: zero displacement is a fixed point for every method") {
  const Box box = Box::square(0.0, 1.0);
  const auto s = MapSpace::build(box, 4, BoundaryCondition::normal_zero, SpaceKind::full);
  const MatrixXd x = circle_cloud(10, 0.3, {0.5, 0.5});
  for (RegMethod m : {RegMethod::tykhonov, RegMethod::morozov, RegMethod::inverted}) {
    RegistrationProblem prob;
    prob.space = &s;
    prob.objective.kind = ObjectiveKind::exp_jac;
    prob.objective.epsilon = 0.1;
    prob.method = m;
    prob.xi = 1e-5;
    prob.delta = 1e-6;
    prob.x_pts = x;
    prob.y_pts = x;
    const auto res = register_map(prob);
    INFO("method ", to_string(m));
    CHECK(res.metrics.misfit_inf <= 1e-6);
    CHECK(res.phi.a.norm() < 1e-3);
  }
}

TEST_CASE("register: morozov achieves the misfit band on a real deformation") {
  const Box box = Box::square(0.0, 1.0);
  const auto s = MapSpace::build(box, 6, BoundaryCondition::normal_zero, SpaceKind::full);
  const MatrixXd x = circle_cloud(8, 0.3, {0.5, 0.5});
  MatrixXd y = circle_cloud(8, 0.34, {0.52, 0.5});
  RegistrationProblem prob;
  prob.space = &s;
  prob.objective.kind = ObjectiveKind::exp_jac;
  prob.objective.epsilon = 0.1;
  prob.method = RegMethod::morozov;
  prob.delta = 1e-4;
  prob.x_pts = x;
  prob.y_pts = y;
  const auto res = register_map(prob);
  CHECK(res.metrics.misfit_inf <= prob.delta * (1.0 + 1e-6));
  CHECK(res.report.constraint_violation == 0.0);
  // objective pressure pushes the misfit toward the boundary of the band
  CHECK(res.metrics.misfit_inf > 0.3 * prob.delta);
}

TEST_CASE("register: tykhonov regularization path is monotone in the misfit") {
  const Box box = Box::square(0.0, 1.0);
  const auto s = MapSpace::build(box, 5, BoundaryCondition::normal_zero, SpaceKind::full);
  const MatrixXd x = circle_cloud(12, 0.3, {0.5, 0.5});
  const MatrixXd y = circle_cloud(12, 0.33, {0.48, 0.52});
  double prev = std::numeric_limits<double>::infinity();
  for (double xi : {1e-3, 1e-4, 1e-5}) {
    RegistrationProblem prob;
    prob.space = &s;
    prob.objective.kind = ObjectiveKind::exp_jac;
    prob.objective.epsilon = 0.1;
    prob.method = RegMethod::tykhonov;
    prob.xi = xi;
    prob.x_pts = x;
    prob.y_pts = y;
    const auto res = register_map(prob);
    CHECK(res.metrics.misfit_l2 <= prev + 1e-8);
    prev = res.metrics.misfit_l2;
  }
}

TEST_CASE("register: inverted formulation keeps the constraint satisfied") {
  const Box box = Box::square(0.0, 1.0);
  const auto s = MapSpace::build(box, 5, BoundaryCondition::normal_zero, SpaceKind::full);
  const MatrixXd x = circle_cloud(10, 0.3, {0.5, 0.5});
  const MatrixXd y = circle_cloud(10, 0.32, {0.52, 0.49});
  RegistrationProblem prob;
  prob.space = &s;
  prob.objective.kind = ObjectiveKind::exp_jac;
  prob.objective.epsilon = 0.1;
  prob.method = RegMethod::inverted;
  prob.xi = 1e-4;
  prob.delta_con = 1.0;
  prob.x_pts = x;
  prob.y_pts = y;
  const auto res = register_map(prob);
  CHECK(res.report.constraint_violation <= 1e-6);
  ObjectiveEngine eng(s, prob.objective);
  CHECK(eng.raw_value_grad(res.phi.a, nullptr) <= prob.delta_con + 1e-6);
  CHECK(res.metrics.misfit_inf < 0.05);  // data still fitted reasonably
}

TEST_CASE("register keeps box faces invariant with the normal-zero space") {
  const Box box = Box::square(0.0, 1.0);
  const auto s = MapSpace::build(box, 5, BoundaryCondition::normal_zero, SpaceKind::full);
  const MatrixXd x = circle_cloud(10, 0.3, {0.5, 0.5});
  const MatrixXd y = circle_cloud(10, 0.35, {0.5, 0.5});
  RegistrationProblem prob;
  prob.space = &s;
  prob.objective.kind = ObjectiveKind::exp_jac;
  prob.objective.epsilon = 0.1;
  prob.method = RegMethod::tykhonov;
  prob.xi = 1e-5;
  prob.x_pts = x;
  prob.y_pts = y;
  const auto res = register_map(prob);
  const MatrixXd samples = box_boundary_samples(box, 60);
  const auto ev = map_eval(res.phi, samples);
  double worst = 0.0;
  for (Index i = 0; i < samples.rows(); ++i) {
    const int face = static_cast<int>(i / 60);
    const int nc = face < 2 ? 1 : 0;
    worst = std::max(worst, std::abs(ev.values(i, nc) - samples(i, nc)));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("register is deterministic") {
  const Box box = Box::square(0.0, 1.0);
  const auto s = MapSpace::build(box, 4, BoundaryCondition::normal_zero, SpaceKind::full);
  RegistrationProblem prob;
  prob.space = &s;
  prob.objective.kind = ObjectiveKind::exp_jac;
  prob.objective.epsilon = 0.1;
  prob.method = RegMethod::tykhonov;
  prob.xi = 1e-4;
  prob.x_pts = circle_cloud(8, 0.3, {0.5, 0.5});
  prob.y_pts = circle_cloud(8, 0.32, {0.5, 0.5});
  const auto r1 = register_map(prob);
  const auto r2 = register_map(prob);
  CHECK((r1.phi.a - r2.phi.a).cwiseAbs().maxCoeff() == 0.0);
  CHECK(r1.report.iterations == r2.report.iterations);
}

TEST_CASE("register_with_cpd pipelines") {
  const Box box = Box::square(0.0, 1.0);
  const auto s = MapSpace::build(box, 5, BoundaryCondition::normal_zero, SpaceKind::full);
  const MatrixXd x = circle_cloud(24, 0.3, {0.5, 0.5});
  RegistrationProblem tmpl;
  tmpl.space = &s;
  tmpl.objective.kind = ObjectiveKind::exp_jac;
  tmpl.objective.epsilon = 0.1;
  tmpl.method = RegMethod::tykhonov;
  tmpl.xi = 1e-5;
  tmpl.x_pts = x;
  CpdConfig ccfg;
  ccfg.beta = 0.5;

  SUBCASE("raw target equal to the reference: everything stays put") {
    const auto out = register_with_cpd(tmpl, x, ccfg);
    CHECK((out.cpd.y_aligned - x).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(out.registration.phi.a.norm() < 1e-3);
  }

  SUBCASE("permuted complete target performs close to the sorted pipeline") {
    const MatrixXd y = circle_cloud(24, 0.33, {0.52, 0.5});
    // sorted baseline
    RegistrationProblem sorted = tmpl;
    sorted.y_pts = y;
    const auto base = register_map(sorted);
    const MatrixXd dense = circle_cloud(600, 0.33, {0.52, 0.5});
    const double geo_sorted = geo_error(base.phi, x, dense);
    // permuted raw target
    MatrixXd perm(24, 2);
    for (int i = 0; i < 24; ++i) perm.row(i) = y.row((7 * i + 3) % 24);
    const auto piped = register_with_cpd(tmpl, perm, ccfg);
    const double geo_cpd = geo_error(piped.registration.phi, x, dense);
    CHECK(geo_cpd < std::max(3.0 * geo_sorted, 2e-3));
    CHECK_THROWS_AS(register_with_cpd(tmpl, MatrixXd(0, 2), ccfg), InputError);
  }
}

TEST_CASE("morph_mesh maps nodes and fixes connectivity") {
  const Mesh mesh = make_square_mesh(6, 1);
  const Box box = Box::square(0.0, 1.0);
  const auto s = MapSpace::build(box, 4, BoundaryCondition::normal_zero, SpaceKind::full);

  SUBCASE("identity map reproduces the mesh") {
    const Mesh out = morph_mesh(mesh, Mapping(s));
    CHECK((out.nodes() - mesh.nodes()).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((out.connectivity() - mesh.connectivity()).cwiseAbs().maxCoeff() == 0);
  }

  SUBCASE("nodes go through map_eval exactly") {
    Mapping phi(s, random_vector(s.size(), 77, 0.05));
    const Mesh out = morph_mesh(mesh, phi);
    const auto ev = map_eval(phi, mesh.nodes());
    CHECK((out.nodes() - ev.values).cwiseAbs().maxCoeff() == 0.0);
    CHECK((out.connectivity() - mesh.connectivity()).cwiseAbs().maxCoeff() == 0);
  }
}

TEST_CASE("jmin_grid restricts to the mesh footprint") {
  const Box box = Box::square(0.0, 1.0);
  const auto s = MapSpace::build(box, 4, BoundaryCondition::normal_zero, SpaceKind::full);
  Mapping id(s);
  CHECK(jmin_grid(id, nullptr, 40) == doctest::Approx(1.0).epsilon(1e-12));
  const Mesh ring = make_ring_mesh(10, 1);
  CHECK(jmin_grid(id, &ring, 40) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("cloud csv round trip and parse errors") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "grr_cloud_io";
  fs::create_directories(dir);
  const MatrixXd pts = random_cloud(13, 2, 5);
  const auto path = (dir / "cloud.csv").string();
  write_cloud_csv(path, pts);
  const MatrixXd back = read_cloud_csv(path);
  CHECK((back - pts).cwiseAbs().maxCoeff() == 0.0);

  const auto bad = (dir / "bad.csv").string();
  std::ofstream out(bad);
  out << "0.1,0.2\nnot,a,number\n";
  out.close();
  CHECK_THROWS_AS(read_cloud_csv(bad), InputError);
}
