#pragma once

#include <vector>

#include "grr/mapspace.hpp"

namespace grr {

struct PodBasis {
  const MapSpace* space = nullptr;
  MatrixXd modes;          // (M_full x M) coefficient columns, H2-orthonormal
  VectorXd eigenvalues;    // all n_train values, non-increasing, clipped at 0
  double tol_pod = 0.0;
  Index mode_count() const { return modes.cols(); }
};

/// Snapshot POD under the full H2(box) inner product.  Eigenvalues below
/// 1e-14 of the largest are clipped to zero and their modes discarded before
/// the energy threshold is applied.
PodBasis pod_build(const MapSpace& space, const std::vector<VectorXd>& snapshots,
                   double tol_pod);

/// Space spanned by the POD modes; usable by registration and reduced CPD.
MapSpace reduce_space(const MapSpace& full, const PodBasis& basis);

/// (m, 1 - EC_m) pairs for m = 1..n_train.
std::vector<std::pair<int, double>> energy_curve(const PodBasis& basis);

void save_pod_eigenvalues_csv(const std::string& path, const PodBasis& basis);

}  // namespace grr
