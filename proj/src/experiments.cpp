#include "grr/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <filesystem>
#include <map>
#include <thread>

#include "grr/cpd.hpp"
#include "grr/geometry.hpp"

namespace grr {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

MatrixXd three_point_reference() {
  MatrixXd x(3, 2);
  x << 0.5, 0.5, 0.25, 0.25, 0.75, 0.25;
  return x;
}

MatrixXd three_point_targets(double t) {
  MatrixXd y1(3, 2);
  y1 << 0.25, 0.75, 1.0 / 16.0, 1.0 / 16.0, 0.5, 0.25;
  return (1.0 - t) * three_point_reference() + t * y1;
}

namespace {

struct GridMesh {
  MatrixXd nodes;
  Eigen::MatrixXi conn;
};

// structured triangulation of [0,1]^2 with an optional cell filter
template <typename KeepCell>
GridMesh structured_grid(int n, KeepCell keep) {
  const double h = 1.0 / n;
  MatrixXd nodes((n + 1) * (n + 1), 2);
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      nodes.row(j * (n + 1) + i) << i * h, j * h;
  std::vector<std::array<int, 3>> tris;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      if (!keep(i, j)) continue;
      const int a = j * (n + 1) + i, b = a + 1, c = b + (n + 1), d = a + (n + 1);
      tris.push_back({a, b, d});
      tris.push_back({b, c, d});
    }
  // compact unused nodes
  std::vector<int> remap(nodes.rows(), -1);
  int next = 0;
  for (const auto& t : tris)
    for (int v : t)
      if (remap[v] < 0) remap[v] = next++;
  MatrixXd cn(next, 2);
  for (Index i = 0; i < nodes.rows(); ++i)
    if (remap[i] >= 0) cn.row(remap[i]) = nodes.row(i);
  Eigen::MatrixXi conn(static_cast<Index>(tris.size()), 3);
  for (std::size_t k = 0; k < tris.size(); ++k)
    conn.row(static_cast<Index>(k)) << remap[tris[k][0]], remap[tris[k][1]],
        remap[tris[k][2]];
  return {std::move(cn), std::move(conn)};
}

// vertex triangles -> six-node triangles with shared edge midpoints
GridMesh to_p2(const GridMesh& g) {
  std::map<std::pair<int, int>, int> midpoint;
  std::vector<Eigen::RowVector2d> extra;
  auto mid = [&](int a, int b) {
    const auto key = std::minmax(a, b);
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    const int idx = static_cast<int>(g.nodes.rows() + extra.size());
    extra.push_back(0.5 * (g.nodes.row(a) + g.nodes.row(b)));
    midpoint.emplace(key, idx);
    return idx;
  };
  Eigen::MatrixXi conn(g.conn.rows(), 6);
  for (Index k = 0; k < g.conn.rows(); ++k) {
    const int a = g.conn(k, 0), b = g.conn(k, 1), c = g.conn(k, 2);
    conn.row(k) << a, b, c, mid(a, b), mid(b, c), mid(c, a);
  }
  MatrixXd nodes(g.nodes.rows() + static_cast<Index>(extra.size()), 2);
  nodes.topRows(g.nodes.rows()) = g.nodes;
  for (std::size_t i = 0; i < extra.size(); ++i)
    nodes.row(g.nodes.rows() + static_cast<Index>(i)) = extra[i];
  return {std::move(nodes), std::move(conn)};
}

Mesh finish_mesh(GridMesh g, int degree) {
  if (degree == 2) g = to_p2(g);
  return Mesh(2, degree, std::move(g.nodes), std::move(g.conn));
}

}  // namespace

Mesh make_square_mesh(int n, int degree) {
  if (n < 1) throw InputError("make_square_mesh: n >= 1");
  return finish_mesh(structured_grid(n, [](int, int) { return true; }), degree);
}

Mesh make_ring_mesh(int n, int degree) {
  if (n < 5 || n % 5 != 0) throw InputError("make_ring_mesh: n must be a multiple of 5");
  const double h = 1.0 / n;
  auto keep = [&](int i, int j) {
    const double x0 = i * h, x1 = (i + 1) * h, y0 = j * h, y1 = (j + 1) * h;
    return !(x0 >= 0.4 - 1e-12 && x1 <= 0.6 + 1e-12 && y0 >= 0.4 - 1e-12 &&
             y1 <= 0.6 + 1e-12);
  };
  return finish_mesh(structured_grid(n, keep), degree);
}

RingTwistPairs ring_twist_pairs(const Mesh& mesh, double theta_deg) {
  const double tol = 1e-9;
  auto on_inner = [&](double x, double y) {
    const bool xin = x >= 0.4 - tol && x <= 0.6 + tol;
    const bool yin = y >= 0.4 - tol && y <= 0.6 + tol;
    const bool xedge = std::abs(x - 0.4) < tol || std::abs(x - 0.6) < tol;
    const bool yedge = std::abs(y - 0.4) < tol || std::abs(y - 0.6) < tol;
    return (xedge && yin) || (yedge && xin);
  };
  auto on_outer = [&](double x, double y) {
    return std::abs(x) < tol || std::abs(x - 1.0) < tol || std::abs(y) < tol ||
           std::abs(y - 1.0) < tol;
  };
  std::vector<Index> inner, outer;
  for (Index i = 0; i < mesh.n_nodes(); ++i) {
    const double x = mesh.nodes()(i, 0), y = mesh.nodes()(i, 1);
    if (on_inner(x, y))
      inner.push_back(i);
    else if (on_outer(x, y))
      outer.push_back(i);
  }
  const double th = theta_deg * kPi / 180.0;
  const double ct = std::cos(th), st = std::sin(th);
  RingTwistPairs out;
  out.n_inner = static_cast<Index>(inner.size());
  out.x.resize(inner.size() + outer.size(), 2);
  out.y.resize(out.x.rows(), 2);
  Index r = 0;
  for (Index i : inner) {
    const double dx = mesh.nodes()(i, 0) - 0.5, dy = mesh.nodes()(i, 1) - 0.5;
    out.x.row(r) = mesh.nodes().row(i);
    // rotation about the center, center added back
    out.y.row(r) << 0.5 + ct * dx - st * dy, 0.5 + st * dx + ct * dy;
    ++r;
  }
  for (Index i : outer) {
    out.x.row(r) = mesh.nodes().row(i);
    out.y.row(r) = mesh.nodes().row(i);
    ++r;
  }
  return out;
}

TwoHoleParams sample_two_hole_params(Rng& rng) {
  TwoHoleParams p;
  for (Vector3d* nu : {&p.nu1, &p.nu2}) {
    (*nu)(0) = rng.uniform(0.1, 0.4);
    (*nu)(1) = rng.uniform(0.1, 0.4);
    (*nu)(2) = rng.uniform(0.0, kPi / 4.0);
  }
  return p;
}

namespace {

Eigen::RowVector2d hole_point(const Vector2d& center, const Vector3d* nu, double t) {
  double mx = 1.0, my = 1.0;
  if (nu) {
    const double bump = 2e-3 * sq((2.0 * kPi - t) * t);
    mx = 1.0 + (*nu)(0) * sq(std::cos(t + (*nu)(2))) + bump;
    my = 1.0 + (*nu)(1) * sq(std::sin(t + (*nu)(2))) + bump;
  }
  return {center.x() + 0.5 * std::cos(t) * mx, center.y() + 0.5 * std::sin(t) * my};
}

}  // namespace

MatrixXd two_hole_points(const TwoHoleParams* params, int n_v) {
  MatrixXd out(2 * n_v, 2);
  const Vector2d c1(-1.0, 0.0), c2(1.0, 0.0);
  for (int k = 0; k < n_v; ++k) {
    const double t = 2.0 * kPi * k / n_v;
    out.row(k) = hole_point(c1, params ? &params->nu1 : nullptr, t);
    out.row(n_v + k) = hole_point(c2, params ? &params->nu2 : nullptr, t);
  }
  return out;
}

Mesh make_two_hole_mesh(int n, int degree) {
  const double h = 4.0 / n;
  const Vector2d c1(-1.0, 0.0), c2(1.0, 0.0);
  const double r = 0.5;
  GridMesh g = structured_grid(n, [](int, int) { return true; });
  g.nodes = (g.nodes.array() * 4.0 - 2.0).matrix();
  // snap all nodes in a band around each circle onto it, from both sides, so
  // the rim conforms without slivers
  for (Index i = 0; i < g.nodes.rows(); ++i) {
    Vector2d p = g.nodes.row(i).transpose();
    for (const Vector2d& c : {c1, c2}) {
      const double dist = (p - c).norm();
      if (std::abs(dist - r) < 0.45 * h && dist > 1e-12) {
        p = c + (p - c) * (r / dist);
        g.nodes.row(i) = p.transpose();
      }
    }
  }
  // keep triangles whose snapped centroid lies outside both holes and whose
  // orientation survived the snapping
  std::vector<Index> keep_tris;
  for (Index k = 0; k < g.conn.rows(); ++k) {
    const Vector2d a = g.nodes.row(g.conn(k, 0)).transpose();
    const Vector2d b = g.nodes.row(g.conn(k, 1)).transpose();
    const Vector2d c = g.nodes.row(g.conn(k, 2)).transpose();
    const Vector2d centroid = (a + b + c) / 3.0;
    if ((centroid - c1).norm() < r - 1e-12 || (centroid - c2).norm() < r - 1e-12) continue;
    bool vertex_inside = false;
    for (const Vector2d& v : {a, b, c})
      for (const Vector2d& hc : {c1, c2})
        vertex_inside = vertex_inside || (v - hc).norm() < r - 1e-9;
    if (vertex_inside) continue;
    const double det =
        (b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y());
    if (det > 1e-3 * h * h) keep_tris.push_back(k);
  }
  Eigen::MatrixXi conn(static_cast<Index>(keep_tris.size()), 3);
  for (std::size_t k = 0; k < keep_tris.size(); ++k)
    conn.row(static_cast<Index>(k)) = g.conn.row(keep_tris[k]);
  // compact nodes again after the drop
  std::vector<int> remap(g.nodes.rows(), -1);
  int next = 0;
  for (Index k = 0; k < conn.rows(); ++k)
    for (int v = 0; v < 3; ++v)
      if (remap[conn(k, v)] < 0) remap[conn(k, v)] = next++;
  MatrixXd nodes(next, 2);
  for (Index i = 0; i < g.nodes.rows(); ++i)
    if (remap[i] >= 0) nodes.row(remap[i]) = g.nodes.row(i);
  for (Index k = 0; k < conn.rows(); ++k)
    for (int v = 0; v < 3; ++v) conn(k, v) = remap[conn(k, v)];
  GridMesh out{std::move(nodes), std::move(conn)};
  return finish_mesh(std::move(out), degree);
}

ExperimentScale desk_scale() { return {}; }

ExperimentScale paper_scale() {
  ExperimentScale s;
  s.paper = true;
  s.nlp_three = 25;
  s.nlp_ring = 25;
  s.dim_two = 20;
  s.mesh_n_three = 32;
  s.mesh_n_ring = 40;
  s.mesh_n_two = 56;
  s.n_train = 100;
  s.n_test = 20;
  return s;
}

MatrixXd TwoHolesSetup::targets(const TwoHoleParams& p) const {
  return two_hole_points(&p, n_v);
}

MatrixXd TwoHolesSetup::test_curve(const TwoHoleParams& p) const {
  return two_hole_points(&p, 5 * n_v);
}

RegistrationProblem TwoHolesSetup::problem(RegMethod method, double param) const {
  RegistrationProblem prob;
  prob.space = &space;
  prob.objective = objective;
  prob.method = method;
  prob.mesh = &mesh;
  prob.x_pts = x_pts;
  if (method == RegMethod::morozov)
    prob.delta = param;
  else
    prob.xi = param;
  prob.delta_con = 1.0;
  return prob;
}

TwoHolesSetup make_two_holes_setup(const ExperimentScale& scale) {
  // per-direction dimension -> polynomial degree
  const int degree = scale.dim_two - 1;
  TwoHolesSetup s{MapSpace::build(Box::square(-2.0, 2.0), degree,
                                  BoundaryCondition::normal_zero, SpaceKind::full),
                  make_two_hole_mesh(scale.mesh_n_two, 1),
                  ObjectiveConfig{},
                  scale.n_v,
                  MatrixXd()};
  s.objective.kind = ObjectiveKind::exp_mesh;
  s.objective.kappa_msh = 10.0;
  s.x_pts = two_hole_points(nullptr, scale.n_v);
  return s;
}

SweepStats stats_of(const std::vector<double>& v) {
  SweepStats s;
  if (v.empty()) return s;
  s.min = s.max = v[0];
  double acc = 0.0;
  for (double x : v) {
    acc += x;
    s.min = std::min(s.min, x);
    s.max = std::max(s.max, x);
  }
  s.avg = acc / static_cast<double>(v.size());
  return s;
}

namespace {

// bounded worker fan-out with deterministic slot assignment
template <typename Fn>
void parallel_indexed(int n, int jobs, Fn&& fn) {
  if (jobs <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  const int workers = std::min(jobs, n);
  pool.reserve(workers);
  for (int t = 0; t < workers; ++t)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  for (auto& th : pool) th.join();
}

MetricsRow row_from(const std::string& id, const std::string& method, double param,
                    const RegistrationResult& r) {
  MetricsRow row;
  row.run_id = id;
  row.method = method;
  row.param = param;
  row.q_min = r.metrics.q_min;
  row.j_min = r.metrics.j_min;
  row.misfit_inf = r.metrics.misfit_inf;
  row.nbr_its = r.report.iterations;
  row.cost_s = r.report.wall_time_s;
  row.converged = r.report.converged;
  return row;
}

void write_summary_csv(const std::string& path, const std::vector<MetricsRow>& rows) {
  // aggregate avg/min/max per (method, param) over the split
  std::ofstream out(path);
  if (!out) throw InputError("cannot write summary csv: " + path);
  out << "method,param,q_min_avg,q_min_min,geo_avg,geo_max,its_avg,its_max,"
         "cost_avg,cost_max\n";
  std::vector<std::pair<std::string, double>> keys;
  for (const auto& r : rows) {
    const auto key = std::make_pair(r.method, r.param);
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
  }
  for (const auto& [method, param] : keys) {
    std::vector<double> q, geo, its, cost;
    for (const auto& r : rows)
      if (r.method == method && r.param == param) {
        if (std::isfinite(r.q_min)) q.push_back(r.q_min);
        if (std::isfinite(r.geo_error)) geo.push_back(r.geo_error);
        its.push_back(static_cast<double>(r.nbr_its));
        cost.push_back(r.cost_s);
      }
    const auto qs = stats_of(q), gs = stats_of(geo), is = stats_of(its), cs = stats_of(cost);
    out << method << ',' << fmt17(param) << ',' << fmt17(qs.avg) << ',' << fmt17(qs.min)
        << ',' << fmt17(gs.avg) << ',' << fmt17(gs.max) << ',' << fmt17(is.avg) << ','
        << fmt17(is.max) << ',' << fmt17(cs.avg) << ',' << fmt17(cs.max) << '\n';
  }
}


void run_three_point_table(const ExperimentScale& scale, const std::string& out_dir) {
  const MapSpace space = MapSpace::build(Box::square(0.0, 1.0), scale.nlp_three,
                                         BoundaryCondition::normal_zero, SpaceKind::full);
  const Mesh mesh = make_square_mesh(scale.mesh_n_three, 1);
  const MatrixXd x = three_point_reference();
  std::vector<MetricsRow> rows;
  for (ObjectiveKind kind :
       {ObjectiveKind::h2, ObjectiveKind::exp_jac, ObjectiveKind::exp_mesh}) {
    ObjectiveConfig ocfg;
    ocfg.kind = kind;
    ocfg.epsilon = 0.1;
    ocfg.kappa_msh = 10.0;
    ObjectiveEngine engine(space, ocfg, &mesh);
    std::vector<double> ts;
    for (int i = 1; i <= scale.three_schedule; ++i)
      ts.push_back(static_cast<double>(i) / scale.three_schedule);
    auto solve = [&](double t, const VectorXd& start) {
      RegistrationProblem prob;
      prob.space = &space;
      prob.objective = ocfg;
      prob.engine = &engine;
      prob.method = RegMethod::morozov;
      prob.delta = 1e-6;
      prob.mesh = &mesh;
      prob.x_pts = x;
      prob.y_pts = three_point_targets(t);
      prob.start = start;
      auto res = register_map(prob);
      rows.push_back(row_from("three_t" + fmt17(t), to_string(kind), t, res));
      return std::make_pair(res.phi.a, res.report);
    };
    continuation(solve, ts, space.size());
  }
  write_metrics_csv((std::filesystem::path(out_dir) / "three_point.csv").string(), rows);
}

void run_ring_twist_table(const ExperimentScale& scale, const std::string& out_dir) {
  const MapSpace space = MapSpace::build(Box::square(0.0, 1.0), scale.nlp_ring,
                                         BoundaryCondition::normal_zero, SpaceKind::full);
  const Mesh mesh = make_ring_mesh(scale.mesh_n_ring, 1);
  std::vector<MetricsRow> rows;
  for (ObjectiveKind kind : {ObjectiveKind::exp_mesh, ObjectiveKind::exp_jac}) {
    ObjectiveConfig ocfg;
    ocfg.kind = kind;
    ocfg.epsilon = 0.05;
    ocfg.kappa_msh = 10.0;
    ObjectiveEngine engine(space, ocfg, &mesh);
    std::vector<double> thetas;
    for (int i = 1; i <= scale.ring_schedule; ++i)
      thetas.push_back(120.0 * i / scale.ring_schedule);
    auto solve = [&](double theta, const VectorXd& start) {
      const RingTwistPairs pairs = ring_twist_pairs(mesh, theta);
      RegistrationProblem prob;
      prob.space = &space;
      prob.objective = ocfg;
      prob.engine = &engine;
      prob.method = RegMethod::morozov;
      prob.delta = 1e-6;
      prob.mesh = &mesh;
      prob.x_pts = pairs.x;
      prob.y_pts = pairs.y;
      prob.start = start;
      auto res = register_map(prob);
      rows.push_back(row_from("ring_theta" + fmt17(theta), to_string(kind), theta, res));
      return std::make_pair(res.phi.a, res.report);
    };
    continuation(solve, thetas, space.size());
  }
  write_metrics_csv((std::filesystem::path(out_dir) / "ring_twist.csv").string(), rows);
}

void run_two_holes_table(const ExperimentScale& scale, const std::string& out_dir,
                         std::uint64_t seed, int jobs) {
  namespace fs = std::filesystem;
  const TwoHolesSetup setup = make_two_holes_setup(scale);
  const ObjectiveEngine engine(setup.space, setup.objective, &setup.mesh);
  Rng rng(seed);
  std::vector<TwoHoleParams> train(scale.n_train), test(scale.n_test);
  for (auto& p : train) p = sample_two_hole_params(rng);
  for (auto& p : test) p = sample_two_hole_params(rng);

  auto run_sorted = [&](const TwoHoleParams& p, RegMethod m, double param,
                        const MapSpace* space_override,
                        const ObjectiveEngine* eng_override) {
    RegistrationProblem prob = setup.problem(m, param);
    if (space_override) prob.space = space_override;
    prob.engine = eng_override ? eng_override : (space_override ? nullptr : &engine);
    prob.y_pts = setup.targets(p);
    auto res = register_map(prob);
    return res;
  };

  // -- training table (sorted, full space)
  struct MethodSpec {
    RegMethod m;
    double param;
  };
  const std::vector<MethodSpec> specs = {
      {RegMethod::tykhonov, 1e-4}, {RegMethod::tykhonov, 1e-5},
      {RegMethod::morozov, 1e-3},  {RegMethod::morozov, 1e-4},
      {RegMethod::inverted, 1e-4}, {RegMethod::inverted, 1e-5}};
  std::vector<MetricsRow> train_rows(specs.size() * train.size());
  std::vector<VectorXd> snapshots(train.size());  // from tykhonov 1e-5
  for (std::size_t s = 0; s < specs.size(); ++s) {
    const auto& spec = specs[s];
    parallel_indexed(static_cast<int>(train.size()), jobs, [&](int i) {
      auto res = run_sorted(train[i], spec.m, spec.param, nullptr, nullptr);
      MetricsRow row =
          row_from("train" + std::to_string(i), to_string(spec.m), spec.param, res);
      row.geo_error = geo_error(res.phi, setup.x_pts, setup.test_curve(train[i]));
      train_rows[s * train.size() + i] = row;
      if (spec.m == RegMethod::tykhonov && spec.param == 1e-5) snapshots[i] = res.phi.a;
    });
  }
  write_metrics_csv((fs::path(out_dir) / "two_holes_training.csv").string(), train_rows);
  write_summary_csv((fs::path(out_dir) / "two_holes_training_summary.csv").string(),
                    train_rows);

  // -- POD + sorted test table (full vs reduced)
  const PodBasis basis = pod_build(setup.space, snapshots, 1e-5);
  const MapSpace reduced = reduce_space(setup.space, basis);
  save_pod_eigenvalues_csv((fs::path(out_dir) / "pod_eigenvalues_sorted.csv").string(),
                           basis);
  const ObjectiveEngine engine_red(reduced, setup.objective, &setup.mesh);
  std::vector<MetricsRow> test_rows;
  const std::vector<MethodSpec> test_specs = {
      {RegMethod::tykhonov, 1e-5}, {RegMethod::morozov, 1e-4}, {RegMethod::inverted, 1e-5}};
  for (const auto& spec : test_specs) {
    for (std::size_t i = 0; i < test.size(); ++i) {
      auto full = run_sorted(test[i], spec.m, spec.param, nullptr, nullptr);
      MetricsRow frow =
          row_from("test" + std::to_string(i), to_string(spec.m) + "_full", spec.param, full);
      frow.geo_error = geo_error(full.phi, setup.x_pts, setup.test_curve(test[i]));
      test_rows.push_back(frow);
      auto red = run_sorted(test[i], spec.m, spec.param, &reduced, &engine_red);
      MetricsRow rrow = row_from("test" + std::to_string(i),
                                 to_string(spec.m) + "_reduced", spec.param, red);
      rrow.geo_error = geo_error(red.phi, setup.x_pts, setup.test_curve(test[i]));
      test_rows.push_back(rrow);
    }
  }
  write_metrics_csv((fs::path(out_dir) / "two_holes_test_sorted.csv").string(), test_rows);
  write_summary_csv((fs::path(out_dir) / "two_holes_test_sorted_summary.csv").string(),
                    test_rows);

  // -- unsorted test table: subsample + permute, CPD, then registration
  CpdConfig cpd_cfg;
  std::vector<MetricsRow> unsorted_rows;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const MatrixXd y_full = setup.targets(test[i]);
    const Index q = static_cast<Index>(0.8 * static_cast<double>(y_full.rows()));
    std::vector<Index> perm(y_full.rows());
    for (Index k = 0; k < y_full.rows(); ++k) perm[k] = k;
    for (Index k = y_full.rows() - 1; k > 0; --k)
      std::swap(perm[k], perm[static_cast<Index>(rng.next() % (k + 1))]);
    MatrixXd y_raw(q, 2);
    for (Index k = 0; k < q; ++k) y_raw.row(k) = y_full.row(perm[k]);

    RegistrationProblem prob = setup.problem(RegMethod::tykhonov, 1e-4);
    prob.engine = &engine;
    auto piped = register_with_cpd(prob, y_raw, cpd_cfg);
    MetricsRow crow;
    crow.run_id = "test" + std::to_string(i);
    crow.method = "cpd";
    crow.geo_error = geo_error_points(piped.cpd.y_aligned, setup.test_curve(test[i]));
    crow.nbr_its = piped.cpd.iterations;
    crow.cost_s = piped.cpd.wall_time_s;
    crow.converged = piped.cpd.converged;
    unsorted_rows.push_back(crow);
    MetricsRow rrow = row_from("test" + std::to_string(i), "tykhonov_full_cpd", 1e-4,
                               piped.registration);
    rrow.geo_error =
        geo_error(piped.registration.phi, setup.x_pts, setup.test_curve(test[i]));
    unsorted_rows.push_back(rrow);
  }
  write_metrics_csv((fs::path(out_dir) / "two_holes_test_unsorted.csv").string(),
                    unsorted_rows);
  write_summary_csv((fs::path(out_dir) / "two_holes_test_unsorted_summary.csv").string(),
                    unsorted_rows);
}

}  // namespace

void run_table(const std::string& experiment, const ExperimentScale& scale,
               const std::string& out_dir, std::uint64_t seed, int jobs) {
  std::filesystem::create_directories(out_dir);
  if (experiment == "three-point") {
    run_three_point_table(scale, out_dir);
  } else if (experiment == "ring-twist") {
    run_ring_twist_table(scale, out_dir);
  } else if (experiment == "two-holes") {
    run_two_holes_table(scale, out_dir, seed, jobs);
  } else {
    throw InputError("unknown experiment: " + experiment);
  }
}

}  // namespace grr
