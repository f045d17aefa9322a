#include "grr/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>

namespace grr {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

std::pair<VectorXd, SolveReport> minimize_qn(const ValueGrad& f, const VectorXd& a0,
                                             const SolverConfig& cfg) {
  const auto t0 = Clock::now();
  SolveReport rep;
  VectorXd x = a0;
  VectorXd g(x.size());
  double fx = f(x, &g);
  if (!std::isfinite(fx))
    throw NumericalError("minimize_qn: objective not finite at the start point");
  const double g0norm = g.norm();
  // relative tolerance, capped so pathological starting gradients (clamped
  // exponentials) cannot loosen the exit test arbitrarily
  const double gtol = cfg.grad_tol * std::clamp(g0norm, 1.0, 1e4);

  std::deque<std::pair<VectorXd, VectorXd>> pairs;  // (s, y)
  VectorXd q, p, xn, gn(x.size());
  for (int it = 0; it < cfg.max_iters; ++it) {
    if (g.norm() <= gtol) {
      rep.converged = true;
      break;
    }
    // two-loop recursion
    q = g;
    std::vector<double> alpha(pairs.size());
    for (Index i = static_cast<Index>(pairs.size()) - 1; i >= 0; --i) {
      const auto& [s, y] = pairs[i];
      alpha[i] = s.dot(q) / y.dot(s);
      q -= alpha[i] * y;
    }
    if (!pairs.empty()) {
      const auto& [s, y] = pairs.back();
      q *= s.dot(y) / y.dot(y);
    }
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const auto& [s, y] = pairs[i];
      const double beta = y.dot(q) / y.dot(s);
      q += (alpha[i] - beta) * s;
    }
    p = -q;
    double slope = g.dot(p);
    if (!(slope < 0.0)) {  // fall back to steepest descent
      p = -g;
      slope = -g.squaredNorm();
      pairs.clear();
    }
    // Weak-Wolfe line search: Armijo backtracking plus an expansion step when
    // the curvature condition fails, so update pairs keep s.y > 0.  Non-finite
    // trial values count as Armijo violations (feasibility rejection).
    // Without curvature history the direction carries the raw gradient scale,
    // which can be enormous near clamped exponentials; bound the first trial.
    const double pinf = p.cwiseAbs().maxCoeff();
    double step = pairs.empty() ? std::min(1.0, 1.0 / std::max(1.0, pinf)) : 1.0;
    double lo = 0.0, hi = std::numeric_limits<double>::infinity();
    double fn = std::numeric_limits<double>::infinity();
    double best_armijo = -1.0, best_f = fx;
    VectorXd best_x, best_g;
    bool accepted = false;
    for (int bt = 0; bt < cfg.max_backtracks; ++bt) {
      xn = x + step * p;
      fn = f(xn, &gn);
      if (!std::isfinite(fn) || fn > fx + cfg.armijo_c1 * step * slope) {
        hi = step;
        step = 0.5 * (lo + hi);
        continue;
      }
      if (best_armijo < 0.0 || fn < best_f) {
        best_armijo = step;
        best_f = fn;
        best_x = xn;
        best_g = gn;
      }
      if (gn.dot(p) < cfg.wolfe_c2 * slope) {  // still too steep: expand
        lo = step;
        step = std::isfinite(hi) ? 0.5 * (lo + hi) : 2.0 * step;
        continue;
      }
      accepted = true;
      break;
    }
    if (!accepted && best_armijo > 0.0) {  // fall back to the best Armijo point
      xn = best_x;
      gn = best_g;
      fn = best_f;
      accepted = true;
    }
    ++rep.iterations;
    if (!accepted) {
      rep.converged = false;
      fx = f(x, &g);  // restore gradient at x
      break;
    }
    if (cfg.on_accept) cfg.on_accept(xn, fn);
    VectorXd s = xn - x;
    VectorXd y = gn - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      pairs.emplace_back(std::move(s), std::move(y));
      if (static_cast<int>(pairs.size()) > cfg.memory) pairs.pop_front();
    }
    const double stepinf = (xn - x).cwiseAbs().maxCoeff();
    x.swap(xn);
    fx = fn;
    g.swap(gn);
    if (stepinf < cfg.step_tol) {
      rep.converged = g.norm() <= gtol * 10.0;
      break;
    }
  }
  if (rep.iterations == cfg.max_iters) rep.converged = g.norm() <= gtol;
  rep.final_value = fx;
  rep.grad_norm = g.norm();
  rep.wall_time_s = seconds_since(t0);
  return {std::move(x), rep};
}

std::pair<VectorXd, SolveReport> minimize_linconstr(const ValueGrad& f, const VectorXd& a0,
                                                    const LinearBand& band,
                                                    const SolverConfig& cfg) {
  const auto t0 = Clock::now();
  const MatrixXd& A = band.A;
  const double delta = band.delta;
  if (delta <= 0.0) throw InputError("minimize_linconstr: delta must be positive");

  auto resid = [&](const VectorXd& x) -> VectorXd { return A * x - band.c; };

  // Feasibility phase.  Fast path: the minimum-norm correction that moves
  // each violating residual component just inside the band (0.9 delta) --
  // cheap and quality-preserving along a continuation path.  When that
  // correction wrecks the objective (large deformations invert elements and
  // the exponentials blow up), walk to the band instead with an
  // objective-guided quadratic penalty of escalating weight, which keeps the
  // iterates on the valid side the whole way, the way an infeasible-start
  // interior-point method would.
  VectorXd x = a0;
  if (resid(x).cwiseAbs().maxCoeff() >= delta * 0.999) {
    const double f0 = f(x, nullptr);
    const VectorXd r0 = resid(x);
    const VectorXd r_target = r0.cwiseMax(-0.9 * delta).cwiseMin(0.9 * delta);
    Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(A);
    const VectorXd corrected = x + cod.solve(r_target - r0);
    const double f_corr = f(corrected, nullptr);
    if (std::isfinite(f_corr) && f_corr <= 1e6 * std::max(1.0, std::abs(f0)) + 1e6) {
      x = corrected;
    } else {
      double weight = 1.0;
      for (int round = 0; round < 20; ++round) {
        auto penalized = [&](const VectorXd& a, VectorXd* grad) -> double {
          VectorXd fg;
          const double fv = f(a, grad ? &fg : nullptr);
          if (!std::isfinite(fv)) return fv;
          const VectorXd r = resid(a);
          if (grad) grad->noalias() = fg + weight * (A.transpose() * r);
          return fv + 0.5 * weight * r.squaredNorm();
        };
        auto [xp, prep] = minimize_qn(penalized, x, cfg);
        x = xp;
        if (resid(x).cwiseAbs().maxCoeff() < delta * 0.999) break;
        weight *= 10.0;
      }
    }
    double v = resid(x).cwiseAbs().maxCoeff();
    if (v >= delta * 0.999) {
      // least-squares polish as the last resort
      auto lsq = [&](const VectorXd& a, VectorXd* grad) {
        const VectorXd r = resid(a);
        if (grad) grad->noalias() = A.transpose() * r;
        return 0.5 * r.squaredNorm();
      };
      SolverConfig pcfg = cfg;
      pcfg.grad_tol = 1e-12;
      auto [xp, prep] = minimize_qn(lsq, x, pcfg);
      x = xp;
      v = resid(x).cwiseAbs().maxCoeff();
      if (v >= delta * 0.999)
        throw NumericalError("minimize_linconstr: no strictly feasible start found "
                             "(max residual " + fmt17(v) + " vs delta " + fmt17(delta) + ")");
    }
  }

  SolveReport rep;
  double mu = cfg.barrier.mu0;
  const double mu_min = cfg.barrier.mu_min;
  int rounds = cfg.barrier.rounds;
  if (mu_min > 0.0) {
    int need = 1;
    double m = cfg.barrier.mu0;
    while (m > mu_min && need < 60) {
      m *= cfg.barrier.shrink;
      ++need;
    }
    rounds = std::max(rounds, need);
  }
  double fx = 0.0;
  for (int round = 0; round < rounds; ++round) {
    auto barrier_obj = [&](const VectorXd& a, VectorXd* grad) -> double {
      // test the band first so infeasible line-search trials never reach f
      const VectorXd r = resid(a);
      double bsum = 0.0;
      VectorXd coefs(r.size());
      for (Index j = 0; j < r.size(); ++j) {
        const double sl = delta - r(j), sh = delta + r(j);
        if (sl <= 0.0 || sh <= 0.0) return std::numeric_limits<double>::infinity();
        bsum -= std::log(sl) + std::log(sh);
        coefs(j) = 1.0 / sl - 1.0 / sh;
      }
      VectorXd fg;
      const double fv = f(a, grad ? &fg : nullptr);
      if (!std::isfinite(fv)) return fv;
      if (grad) grad->noalias() = fg + mu * (A.transpose() * coefs);
      return fv + mu * bsum;
    };
    SolverConfig icfg = cfg;
    const bool final_round = round + 1 == rounds;
    icfg.grad_tol = final_round ? cfg.barrier.final_tol : cfg.barrier.inner_tol;
    // intermediate centering steps follow the path loosely
    if (!final_round) icfg.max_iters = std::min(cfg.max_iters, 200);
    auto [xr, irep] = minimize_qn(barrier_obj, x, icfg);
    x = xr;
    rep.iterations += irep.iterations;
    rep.converged = irep.converged;
    mu *= cfg.barrier.shrink;
  }
  fx = f(x, nullptr);
  rep.final_value = fx;
  rep.constraint_violation = std::max(0.0, resid(x).cwiseAbs().maxCoeff() - delta);
  rep.wall_time_s = seconds_since(t0);
  return {std::move(x), rep};
}

std::pair<VectorXd, SolveReport> minimize_nlconstr(const ValueGrad& f, const VectorXd& a0,
                                                   const ValueGrad& g, double bound,
                                                   const SolverConfig& cfg) {
  const auto t0 = Clock::now();
  SolveReport rep;
  VectorXd x = a0;
  double lambda = cfg.auglag.lambda0;
  double rho = cfg.auglag.rho0;
  double prev_viol = std::numeric_limits<double>::infinity();
  double fx = 0.0, gx = 0.0;
  for (int outer = 0; outer < cfg.auglag.max_outer; ++outer) {
    auto lag = [&](const VectorXd& a, VectorXd* grad) -> double {
      VectorXd fg, gg;
      const double fv = f(a, grad ? &fg : nullptr);
      if (!std::isfinite(fv)) return fv;
      const double gv = g(a, grad ? &gg : nullptr);
      if (!std::isfinite(gv)) return gv;
      const double t = lambda / rho + (gv - bound);
      double val = fv - lambda * lambda / (2.0 * rho);
      if (t > 0.0) {
        val += 0.5 * rho * t * t;
        if (grad) grad->noalias() = fg + rho * t * gg;
      } else if (grad) {
        *grad = fg;
      }
      return val;
    };
    auto [xr, irep] = minimize_qn(lag, x, cfg);
    x = xr;
    rep.iterations += irep.iterations;
    fx = f(x, nullptr);
    gx = g(x, nullptr);
    const double viol = std::max(0.0, gx - bound);
    lambda = std::max(0.0, lambda + rho * (gx - bound));
    if (viol <= cfg.auglag.tol && irep.converged) {
      rep.converged = true;
      break;
    }
    if (viol > 0.25 * prev_viol) rho *= cfg.auglag.growth;
    prev_viol = std::max(viol, 1e-300);
  }
  rep.final_value = fx;
  rep.constraint_violation = std::max(0.0, gx - bound);
  rep.wall_time_s = seconds_since(t0);
  return {std::move(x), rep};
}

std::vector<std::pair<VectorXd, SolveReport>> continuation(const ParamSolve& run,
                                                           const std::vector<double>& schedule,
                                                           Index n_coeffs) {
  std::vector<std::pair<VectorXd, SolveReport>> out;
  out.reserve(schedule.size());
  VectorXd start = VectorXd::Zero(n_coeffs);
  for (double t : schedule) {
    out.push_back(run(t, start));
    start = out.back().first;
  }
  return out;
}

}  // namespace grr
