#pragma once

#include <functional>
#include <vector>

#include "grr/common.hpp"

namespace grr {

struct SolverConfig {
  int max_iters = 500;
  /// Called with each accepted iterate and its objective value.
  std::function<void(const VectorXd&, double)> on_accept;
  double grad_tol = 1e-6;   // relative first-order tolerance
  double step_tol = 1e-14;  // infinity-norm of the accepted step
  int memory = 20;          // quasi-Newton pair memory
  double armijo_c1 = 1e-4;
  double wolfe_c2 = 0.9;  // weak curvature condition for the update pairs
  double backtrack = 0.5;
  int max_backtracks = 60;

  struct Barrier {
    double mu0 = 1.0;
    double shrink = 0.2;
    int rounds = 8;
    // Rounds are extended until mu <= mu_min when positive; the Morozov
    // dispatcher sets this from delta so active constraints can approach
    // the boundary.
    double mu_min = 0.0;
    double inner_tol = 1e-6;
    double final_tol = 1e-8;
  } barrier;

  struct AugLag {
    double lambda0 = 0.0;
    double rho0 = 10.0;
    double growth = 10.0;
    double tol = 1e-6;  // constraint violation tolerance
    int max_outer = 15;
  } auglag;
};

struct SolveReport {
  int iterations = 0;
  double final_value = 0.0;
  double grad_norm = 0.0;
  double constraint_violation = 0.0;
  double wall_time_s = 0.0;
  bool converged = false;
};

/// f(a, grad_out) -> value; grad_out may be null when only the value is needed.
using ValueGrad = std::function<double(const VectorXd&, VectorXd*)>;

/// Limited-memory quasi-Newton descent with Armijo backtracking.
std::pair<VectorXd, SolveReport> minimize_qn(const ValueGrad& f, const VectorXd& a0,
                                             const SolverConfig& cfg = {});

/// Linear inequality constraints |A a - c| <= delta (elementwise), handled by
/// a log-barrier outer loop.  The start is the minimum-norm least-squares
/// interpolant; an infeasible problem raises NumericalError.
struct LinearBand {
  MatrixXd A;
  VectorXd c;
  double delta = 0.0;
};

std::pair<VectorXd, SolveReport> minimize_linconstr(const ValueGrad& f, const VectorXd& a0,
                                                    const LinearBand& band,
                                                    const SolverConfig& cfg = {});

/// One scalar smooth inequality g(a) <= bound via an augmented Lagrangian.
std::pair<VectorXd, SolveReport> minimize_nlconstr(const ValueGrad& f, const VectorXd& a0,
                                                   const ValueGrad& g, double bound,
                                                   const SolverConfig& cfg = {});

/// Warm-started sweep over a parameter schedule.  The first solve starts
/// from zero coefficients; each later solve starts from the previous result.
using ParamSolve =
    std::function<std::pair<VectorXd, SolveReport>(double t, const VectorXd& start)>;

std::vector<std::pair<VectorXd, SolveReport>> continuation(const ParamSolve& run,
                                                           const std::vector<double>& schedule,
                                                           Index n_coeffs);

}  // namespace grr
