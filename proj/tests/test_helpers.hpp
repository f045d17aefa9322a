#pragma once

#include "grr/common.hpp"

namespace grr::testing {

inline MatrixXd random_cloud(Index n, Index d, std::uint64_t seed, double lo = -1.0,
                             double hi = 1.0) {
  Rng rng(seed);
  MatrixXd m(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j) m(i, j) = rng.uniform(lo, hi);
  return m;
}

inline VectorXd random_vector(Index n, std::uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  VectorXd v(n);
  for (Index i = 0; i < n; ++i) v(i) = scale * rng.uniform(-1.0, 1.0);
  return v;
}

}  // namespace grr::testing
