#include "grr/registration.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace grr {

MatrixXd read_cloud_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open point cloud: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    if (line.find_first_not_of(" \t\r\n,") == std::string::npos) continue;
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        vals.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw InputError(path + ":" + std::to_string(lineno) + ": bad number '" + tok + "'");
      }
    }
    if (!rows.empty() && rows.front().size() != vals.size())
      throw InputError(path + ":" + std::to_string(lineno) + ": inconsistent column count");
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) throw InputError(path + ": empty point cloud");
  MatrixXd out(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows.front().size(); ++j) out(i, j) = rows[i][j];
  return out;
}

void write_cloud_csv(const std::string& path, const MatrixXd& points) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write point cloud: " + path);
  for (Index i = 0; i < points.rows(); ++i) {
    for (Index j = 0; j < points.cols(); ++j) out << (j ? "," : "") << fmt17(points(i, j));
    out << '\n';
  }
}

RegMethod reg_method_from_string(const std::string& s) {
  if (s == "tykhonov") return RegMethod::tykhonov;
  if (s == "morozov") return RegMethod::morozov;
  if (s == "inverted") return RegMethod::inverted;
  throw InputError("unknown registration method: " + s);
}

std::string to_string(RegMethod m) {
  switch (m) {
    case RegMethod::tykhonov: return "tykhonov";
    case RegMethod::morozov: return "morozov";
    case RegMethod::inverted: return "inverted";
  }
  return "?";
}

BzSystem assemble_Bz(const MapSpace& space, const MatrixXd& x_pts, const MatrixXd& y_pts) {
  if (x_pts.rows() != y_pts.rows() || x_pts.cols() != y_pts.cols())
    throw InputError("assemble_Bz: clouds must be paired");
  const Index n = x_pts.rows();
  const int d = space.dim();
  for (Index i = 0; i < n; ++i)
    if (!space.box().contains(x_pts.row(i).transpose(), 1e-9))
      throw NumericalError("assemble_Bz: reference point outside the box");
  MatrixXd V;
  space.eval_basis(x_pts, &V, nullptr, nullptr);
  BzSystem sys;
  sys.B.resize(d * n, space.size());
  sys.offset.resize(d * n);
  sys.z.resize(d * n);
  // component-major stacking: all first components, then second, ...
  for (int r = 0; r < d; ++r)
    for (Index i = 0; i < n; ++i) {
      sys.B.row(r * n + i) = V.row(i * d + r);
      sys.offset(r * n + i) = x_pts(i, r);
      sys.z(r * n + i) = y_pts(i, r);
    }
  return sys;
}

Mesh morph_mesh(const Mesh& mesh, const Mapping& phi) {
  const auto ev = map_eval(phi, mesh.nodes());
  // unchecked: a failed registration may legitimately invert elements
  return Mesh::unchecked(mesh.dim(), mesh.degree(), ev.values, mesh.connectivity());
}

double jmin_grid(const Mapping& phi, const Mesh* mesh, int n_per_dir) {
  const Box& box = phi.space->box();
  if (box.dim() != 2) throw InputError("jmin_grid: d=2 only");
  std::vector<double> xs(n_per_dir), ys(n_per_dir);
  for (int i = 0; i < n_per_dir; ++i) {
    const double t = (i + 0.5) / n_per_dir;
    xs[i] = box.lo(0) + t * (box.hi(0) - box.lo(0));
    ys[i] = box.lo(1) + t * (box.hi(1) - box.lo(1));
  }
  std::vector<Vector2d> pts;
  pts.reserve(static_cast<std::size_t>(n_per_dir) * n_per_dir);
  std::optional<MeshLocator> loc;
  if (mesh) loc.emplace(*mesh);
  for (int i = 0; i < n_per_dir; ++i)
    for (int j = 0; j < n_per_dir; ++j) {
      Vector2d p(xs[i], ys[j]);
      if (!loc || loc->locate(p) >= 0) pts.push_back(p);
    }
  if (mesh) {
    // element vertices always count; the grid alone can miss thin regions
    for (Index i = 0; i < mesh->n_nodes(); ++i)
      pts.push_back(mesh->nodes().row(i).transpose());
  }
  if (pts.empty()) return std::numeric_limits<double>::quiet_NaN();
  MatrixXd P(static_cast<Index>(pts.size()), 2);
  for (std::size_t i = 0; i < pts.size(); ++i) P.row(static_cast<Index>(i)) = pts[i].transpose();
  return jacobian_det(phi, P).minCoeff();
}

void fill_mesh_metrics(const Mapping& phi, const Mesh& mesh, RegistrationMetrics& m) {
  const auto ev = map_eval(phi, mesh.nodes());
  const auto q = mesh_quality(mesh, &ev.values);
  const auto b = discrete_bijectivity(mesh, ev.values);
  m.q_min = q.q_min;
  m.min_det_ratio = b.min_det;
  m.j_min = jmin_grid(phi, &mesh);
}

RegistrationResult register_map(const RegistrationProblem& problem) {
  const MapSpace& space = *problem.space;
  const BzSystem sys = assemble_Bz(space, problem.x_pts, problem.y_pts);
  std::optional<ObjectiveEngine> own_engine;
  const ObjectiveEngine* eng = problem.engine;
  if (!eng) {
    own_engine.emplace(space, problem.objective, problem.mesh);
    eng = &*own_engine;
  }

  const VectorXd a0 =
      problem.start ? *problem.start : VectorXd::Zero(space.size());

  RegistrationResult res;
  switch (problem.method) {
    case RegMethod::tykhonov: {
      const double xi = problem.xi;
      auto fn = [&](const VectorXd& a, VectorXd* grad) {
        const VectorXd r = sys.B * a + sys.offset - sys.z;
        double v;
        if (grad) {
          VectorXd og;
          v = eng->value_grad(a, og);
          if (std::isfinite(v)) grad->noalias() = xi * og + sys.B.transpose() * r;
        } else {
          v = eng->value(a);
        }
        if (!std::isfinite(v)) return v;
        return xi * v + 0.5 * r.squaredNorm();
      };
      auto [a, rep] = minimize_qn(fn, a0, problem.solver);
      res.phi = Mapping(space, std::move(a));
      res.report = rep;
      break;
    }
    case RegMethod::morozov: {
      auto fn = [&](const VectorXd& a, VectorXd* grad) {
        if (grad) return eng->value_grad(a, *grad);
        return eng->value(a);
      };
      LinearBand band{sys.B, sys.z - sys.offset, problem.delta};
      SolverConfig cfg = problem.solver;
      if (cfg.barrier.mu_min <= 0.0) cfg.barrier.mu_min = 1e-4 * problem.delta;
      auto [a, rep] = minimize_linconstr(fn, a0, band, cfg);
      res.phi = Mapping(space, std::move(a));
      res.report = rep;
      break;
    }
    case RegMethod::inverted: {
      const double xi = problem.xi;
      auto fn = [&](const VectorXd& a, VectorXd* grad) {
        const VectorXd r = sys.B * a + sys.offset - sys.z;
        if (grad) {
          eng->penalty_grad(a, *grad);
          *grad = xi * *grad + sys.B.transpose() * r;
        }
        return 0.5 * r.squaredNorm() + xi * eng->penalty(a);
      };
      auto gn = [&](const VectorXd& a, VectorXd* grad) {
        return eng->raw_value_grad(a, grad);
      };
      auto [a, rep] = minimize_nlconstr(fn, a0, gn, problem.delta_con, problem.solver);
      res.phi = Mapping(space, std::move(a));
      res.report = rep;
      break;
    }
  }

  const VectorXd r = sys.B * res.phi.a + sys.offset - sys.z;
  res.metrics.misfit_inf = r.size() ? r.cwiseAbs().maxCoeff() : 0.0;
  res.metrics.misfit_l2 = r.norm();
  res.metrics.objective_value = eng->value(res.phi.a);
  if (problem.method == RegMethod::morozov)
    res.report.constraint_violation = std::max(0.0, res.metrics.misfit_inf - problem.delta);
  if (problem.mesh) fill_mesh_metrics(res.phi, *problem.mesh, res.metrics);
  return res;
}

CpdRegistrationResult register_with_cpd(const RegistrationProblem& tmpl,
                                        const MatrixXd& y_raw, const CpdConfig& cpd_cfg,
                                        const MapSpace* reduced) {
  if (y_raw.rows() == 0) throw InputError("register_with_cpd: empty target cloud");
  CpdRegistrationResult out;
  out.cpd = reduced ? cpd_run_reduced(tmpl.x_pts, y_raw, cpd_cfg, *reduced)
                    : cpd_run(tmpl.x_pts, y_raw, cpd_cfg);
  RegistrationProblem prob = tmpl;
  prob.y_pts = out.cpd.y_aligned;
  out.registration = register_map(prob);
  return out;
}

}  // namespace grr
