#include "grr/objective.hpp"

#include <cmath>

#include "grr/kernels.hpp"
#include "grr/quadrature.hpp"

namespace grr {

ObjectiveKind objective_kind_from_string(const std::string& s) {
  if (s == "h2") return ObjectiveKind::h2;
  if (s == "exp_jac" || s == "exp-jac") return ObjectiveKind::exp_jac;
  if (s == "exp_mesh" || s == "exp-mesh") return ObjectiveKind::exp_mesh;
  if (s == "lin_elastic") return ObjectiveKind::lin_elastic;
  if (s == "neohookean") return ObjectiveKind::neohookean;
  throw InputError("unknown objective kind: " + s);
}

std::string to_string(ObjectiveKind k) {
  switch (k) {
    case ObjectiveKind::h2: return "h2";
    case ObjectiveKind::exp_jac: return "exp_jac";
    case ObjectiveKind::exp_mesh: return "exp_mesh";
    case ObjectiveKind::lin_elastic: return "lin_elastic";
    case ObjectiveKind::neohookean: return "neohookean";
  }
  return "?";
}

ObjectiveEngine::ObjectiveEngine(const MapSpace& space, ObjectiveConfig cfg, const Mesh* mesh)
    : space_(&space), cfg_(cfg), mesh_(mesh) {
  if (cfg_.kind == ObjectiveKind::exp_jac && cfg_.epsilon <= 0.0)
    throw InputError("objective: epsilon must be positive");
  if (cfg_.kind == ObjectiveKind::exp_mesh && cfg_.kappa_msh < 1.0)
    throw InputError("objective: kappa_msh must be >= 1");
  const int default_order = space.degree() + 2;
  if (cfg_.quad_order != 0 && cfg_.quad_order < space.degree() + 1)
    throw InputError("objective: quad_order must be at least degree+1");
  if (cfg_.quad_order == 0 || cfg_.quad_order == default_order) {
    grads_table_ = &space.quad_grads();
    weights_ = &space.quad().weights;
  } else {
    const BoxQuad q = box_quadrature(space.box(), cfg_.quad_order);
    space.eval_basis(q.points, nullptr, &own_grads_, nullptr);
    own_weights_ = q.weights;
    grads_table_ = &own_grads_;
    weights_ = &own_weights_;
  }
  if (cfg_.kind == ObjectiveKind::exp_mesh) {
    if (!mesh_) throw InputError("objective: exp_mesh requires a mesh");
    if (mesh_->dim() != 2) throw InputError("objective: exp_mesh implemented for d=2");
    space.eval_basis(mesh_->nodes(), &node_values_, nullptr, nullptr);
    const SimplexRule rule = triangle_rule(mesh_->degree() == 1 ? 1 : 4);
    qp_weights_ = rule.weights;
    const int n_lp = mesh_->reference().n_lp();
    shape_grads_.resize(rule.points.rows() * n_lp, 2);
    VectorXd vals;
    MatrixXd grads;
    for (Index q = 0; q < rule.points.rows(); ++q) {
      shape_eval(mesh_->reference(), rule.points.row(q).transpose(), vals, grads);
      shape_grads_.block(q * n_lp, 0, n_lp, 2) = grads;
    }
    elem_volume_.resize(mesh_->n_elems());
    for (Index k = 0; k < mesh_->n_elems(); ++k) elem_volume_(k) = mesh_->elem_volume(k);
  }
}

double ObjectiveEngine::penalty(const VectorXd& a) const {
  return 0.5 * a.dot(space_->seminorm_matrix() * a);
}

void ObjectiveEngine::penalty_grad(const VectorXd& a, VectorXd& grad) const {
  grad.noalias() = space_->seminorm_matrix() * a;
}

double ObjectiveEngine::raw_value_grad(const VectorXd& a, VectorXd* grad) const {
  switch (cfg_.kind) {
    case ObjectiveKind::h2:
      if (grad) grad->setZero(space_->size());
      return 0.0;
    case ObjectiveKind::exp_jac:
      return expjac_value_grad(a, grad);
    case ObjectiveKind::exp_mesh:
      return expmesh_value_grad(a, grad);
    case ObjectiveKind::lin_elastic:
    case ObjectiveKind::neohookean:
      return elastic_value_grad(a, grad);
  }
  throw NumericalError("objective: unreachable");
}

double ObjectiveEngine::value(const VectorXd& a) const {
  const double raw = raw_value_grad(a, nullptr);
  if (!std::isfinite(raw)) return raw;
  const bool with_pen = cfg_.include_penalty || cfg_.kind == ObjectiveKind::h2;
  return raw + (with_pen ? penalty(a) : 0.0);
}

double ObjectiveEngine::value_grad(const VectorXd& a, VectorXd& grad) const {
  const double raw = raw_value_grad(a, &grad);
  if (!std::isfinite(raw)) return raw;
  const bool with_pen = cfg_.include_penalty || cfg_.kind == ObjectiveKind::h2;
  if (!with_pen) return raw;
  grad.noalias() += space_->seminorm_matrix() * a;
  return raw + penalty(a);
}

namespace {

RowMat displacement_grads(const MatrixXd& table, const VectorXd& a, int dd) {
  const VectorXd g = table * a;
  RowMat gu(g.size() / dd, dd);
  for (Index q = 0; q < gu.rows(); ++q)
    for (int i = 0; i < dd; ++i) gu(q, i) = g(q * dd + i);
  return gu;
}

}  // namespace

double ObjectiveEngine::expjac_value_grad(const VectorXd& a, VectorXd* grad) const {
  const int d = space_->dim();
  const RowMat gu = displacement_grads(*grads_table_, a, d * d);
  VectorXd terms;
  RowMat sens;
  expjac_terms(gu, *weights_, cfg_.epsilon, cfg_.c_exp_effective(), cfg_.exp_clamp, terms,
               sens);
  const double vol = space_->box().volume();
  const double value = pairwise_sum({terms.data(), static_cast<std::size_t>(terms.size())}) / vol;
  if (grad) {
    Eigen::Map<const VectorXd> svec(sens.data(), sens.size());
    grad->noalias() = grads_table_->transpose() * svec / vol;
  }
  return value;
}

double ObjectiveEngine::elastic_value_grad(const VectorXd& a, VectorXd* grad) const {
  const int d = space_->dim();
  const int dd = d * d;
  const RowMat gu = displacement_grads(*grads_table_, a, dd);
  const Index P = gu.rows();
  const double l1 = cfg_.lambda1, l2 = cfg_.lambda2;
  const bool neo = cfg_.kind == ObjectiveKind::neohookean;
  VectorXd terms(P);
  RowMat sens;
  if (grad) sens.setZero(P, dd);
  int infeasible = 0;
#pragma omp parallel for schedule(static) reduction(|| : infeasible)
  for (Index q = 0; q < P; ++q) {
    const double w = (*weights_)(q);
    MatrixXd G(d, d);
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) G(r, c) = gu(q, r * d + c);
    if (!neo) {
      const double divu = G.trace();
      const MatrixXd e = 0.5 * (G + G.transpose());
      terms(q) = w * (l1 * divu * divu + 2.0 * l2 * e.squaredNorm());
      if (grad) {
        MatrixXd S = 2.0 * l1 * divu * MatrixXd::Identity(d, d) + 4.0 * l2 * e;
        for (int r = 0; r < d; ++r)
          for (int c = 0; c < d; ++c) sens(q, r * d + c) = w * S(r, c);
      }
    } else {
      const MatrixXd A = MatrixXd::Identity(d, d) + G;
      const double J = A.determinant();
      if (J <= 0.0) {
        infeasible = true;
        terms(q) = 0.0;
      } else {
        const double lj = std::log(J);
        terms(q) = w * (0.5 * l2 * A.squaredNorm() - l2 * lj + l1 * lj * lj);
        if (grad) {
          const MatrixXd cof = J * A.inverse().transpose();
          const MatrixXd S = l2 * A + (2.0 * l1 * lj - l2) / J * cof;
          for (int r = 0; r < d; ++r)
            for (int c = 0; c < d; ++c) sens(q, r * d + c) = w * S(r, c);
        }
      }
    }
  }
  if (infeasible) {
    if (grad) grad->setZero(space_->size());
    return std::numeric_limits<double>::infinity();
  }
  const double value = pairwise_sum({terms.data(), static_cast<std::size_t>(terms.size())});
  if (grad) {
    Eigen::Map<const VectorXd> svec(sens.data(), sens.size());
    grad->noalias() = grads_table_->transpose() * svec;
  }
  return value;
}

double ObjectiveEngine::expmesh_value_grad(const VectorXd& a, VectorXd* grad) const {
  const Mesh& mesh = *mesh_;
  const int d = 2;
  const Index nn = mesh.n_nodes();
  // moved node positions
  VectorXd disp = node_values_ * a;
  MatrixXd moved = mesh.nodes();
  for (Index i = 0; i < nn; ++i)
    for (int r = 0; r < d; ++r) moved(i, r) += disp(i * d + r);

  const int n_lp = mesh.reference().n_lp();
  const Index nq = qp_weights_.size();
  const Index ne = mesh.n_elems();
  const double vol = space_->box().volume();
  const double sign = cfg_.literal_exp_mesh_sign ? -1.0 : 1.0;
  VectorXd terms(ne);
  MatrixXd node_sens;
  if (grad) node_sens = MatrixXd::Zero(nn, d);
  std::vector<MatrixXd> elem_sens;
  if (grad) elem_sens.assign(ne, MatrixXd());
#pragma omp parallel for schedule(static)
  for (Index k = 0; k < ne; ++k) {
    double acc = 0.0;
    MatrixXd es;
    if (grad) es = MatrixXd::Zero(n_lp, d);
    for (Index q = 0; q < nq; ++q) {
      Matrix2d A = Matrix2d::Zero();
      for (int i = 0; i < n_lp; ++i) {
        const Vector2d xi = moved.row(mesh.connectivity()(k, i)).transpose();
        A += xi * shape_grads_.row(q * n_lp + i);
      }
      const double det = A.determinant();
      const double F = A.squaredNorm();
      double qv;
      Matrix2d dq = Matrix2d::Zero();
      if (det <= 0.0) {
        qv = cfg_.kappa_msh + cfg_.q_cap_excess;
      } else {
        const double ratio = F / det;
        qv = ratio * ratio / (d * d);
        if (grad) {
          Matrix2d cof;
          cof << A(1, 1), -A(1, 0), -A(0, 1), A(0, 0);
          dq = (2.0 * ratio / (d * d)) * (2.0 / det * A - (F / (det * det)) * cof);
        }
      }
      double arg = sign * (qv - cfg_.kappa_msh);
      const bool clamped = arg > cfg_.exp_clamp;
      if (clamped) arg = cfg_.exp_clamp;
      const double e = std::exp(arg);
      const double w = elem_volume_(k) * qp_weights_(q) / vol;
      acc += w * e;
      if (grad && !clamped && det > 0.0) {
        const Matrix2d S = (w * e * sign) * dq;
        for (int i = 0; i < n_lp; ++i)
          es.row(i) += shape_grads_.row(q * n_lp + i) * S.transpose();
      }
    }
    terms(k) = acc;
    if (grad) elem_sens[k] = std::move(es);
  }
  if (grad) {
    for (Index k = 0; k < ne; ++k)
      for (int i = 0; i < n_lp; ++i)
        node_sens.row(mesh.connectivity()(k, i)) += elem_sens[k].row(i);
    VectorXd nsv(nn * d);
    for (Index i = 0; i < nn; ++i)
      for (int r = 0; r < d; ++r) nsv(i * d + r) = node_sens(i, r);
    grad->noalias() = node_values_.transpose() * nsv;
  }
  return pairwise_sum({terms.data(), static_cast<std::size_t>(terms.size())});
}

double penalty_h2(const Mapping& phi) {
  return 0.5 * phi.a.dot(phi.space->seminorm_matrix() * phi.a);
}

double f_expjac(const Mapping& phi, const ObjectiveConfig& cfg) {
  ObjectiveConfig c = cfg;
  c.kind = ObjectiveKind::exp_jac;
  return ObjectiveEngine(*phi.space, c).raw_value_grad(phi.a, nullptr);
}

double f_expmesh(const Mapping& phi, const Mesh& mesh, const ObjectiveConfig& cfg) {
  ObjectiveConfig c = cfg;
  c.kind = ObjectiveKind::exp_mesh;
  return ObjectiveEngine(*phi.space, c, &mesh).raw_value_grad(phi.a, nullptr);
}

double f_linelastic(const Mapping& phi, const ObjectiveConfig& cfg) {
  ObjectiveConfig c = cfg;
  c.kind = ObjectiveKind::lin_elastic;
  return ObjectiveEngine(*phi.space, c).raw_value_grad(phi.a, nullptr);
}

double f_neohookean(const Mapping& phi, const ObjectiveConfig& cfg) {
  ObjectiveConfig c = cfg;
  c.kind = ObjectiveKind::neohookean;
  return ObjectiveEngine(*phi.space, c).raw_value_grad(phi.a, nullptr);
}

std::pair<double, VectorXd> objective_value_grad(const ObjectiveConfig& cfg,
                                                 const Mapping& phi, const Mesh* mesh) {
  ObjectiveEngine eng(*phi.space, cfg, mesh);
  VectorXd g;
  const double v = eng.value_grad(phi.a, g);
  return {v, std::move(g)};
}

}  // namespace grr
