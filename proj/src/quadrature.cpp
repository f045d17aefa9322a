#include "grr/quadrature.hpp"

#include <cmath>

#include "grr/legendre.hpp"

namespace grr {

GaussRule gauss_legendre(int n) {
  if (n < 1) throw NumericalError("gauss_legendre: need at least one point");
  GaussRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  const double pi = 3.14159265358979323846;
  std::vector<double> v(n + 1), d1(n + 1);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Chebyshev-like initial guess, then Newton on P_n.
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      legendre_all(n, x, v.data(), d1.data(), nullptr);
      const double dx = v[n] / d1[n];
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    legendre_all(n, x, v.data(), d1.data(), nullptr);
    const double w = 2.0 / ((1.0 - x * x) * d1[n] * d1[n]);
    r.nodes(i) = -x;
    r.nodes(n - 1 - i) = x;
    r.weights(i) = w;
    r.weights(n - 1 - i) = w;
  }
  if (n % 2 == 1) {
    r.nodes((n - 1) / 2) = 0.0;
    if (n == 1) r.weights(0) = 2.0;
  }
  return r;
}

SimplexRule triangle_rule(int degree) {
  SimplexRule r;
  if (degree <= 1) {
    r.points.resize(1, 2);
    r.points << 1.0 / 3.0, 1.0 / 3.0;
    r.weights.resize(1);
    r.weights << 0.5;
    return r;
  }
  // Six-point degree-4 rule (Dunavant), weights scaled to area 1/2.
  const double a1 = 0.445948490915965, b1 = 0.108103018168070;
  const double a2 = 0.091576213509771, b2 = 0.816847572980459;
  const double w1 = 0.223381589678011, w2 = 0.109951743655322;
  r.points.resize(6, 2);
  r.points << a1, a1, a1, b1, b1, a1, a2, a2, a2, b2, b2, a2;
  r.weights.resize(6);
  r.weights << w1, w1, w1, w2, w2, w2;
  r.weights *= 0.5;
  return r;
}

}  // namespace grr
