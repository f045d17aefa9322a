#include "grr/pod.hpp"

#include <cmath>
#include <fstream>

namespace grr {

PodBasis pod_build(const MapSpace& space, const std::vector<VectorXd>& snapshots,
                   double tol_pod) {
  const Index n = static_cast<Index>(snapshots.size());
  if (n < 1) throw InputError("pod: need at least one snapshot");
  if (!(tol_pod > 0.0 && tol_pod < 1.0)) throw InputError("pod: tol must lie in (0,1)");
  MatrixXd A(space.size(), n);
  for (Index i = 0; i < n; ++i) {
    if (snapshots[i].size() != space.size())
      throw InputError("pod: snapshot size mismatch");
    A.col(i) = snapshots[i];
  }
  MatrixXd C = A.transpose() * space.h2_gram() * A;
  C = 0.5 * (C + C.transpose());

  Eigen::SelfAdjointEigenSolver<MatrixXd> es(C);
  // descending order
  VectorXd lam(n);
  MatrixXd vec(n, n);
  for (Index i = 0; i < n; ++i) {
    lam(i) = es.eigenvalues()(n - 1 - i);
    vec.col(i) = es.eigenvectors().col(n - 1 - i);
  }
  const double lmax = lam(0);
  if (lmax <= 0.0) throw InputError("pod: all snapshots are zero (degenerate input)");
  Index usable = 0;
  for (Index i = 0; i < n; ++i) {
    if (lam(i) < 1e-14 * lmax) lam(i) = 0.0;
    if (lam(i) > 0.0) usable = i + 1;
  }
  const double total = lam.sum();
  Index m = usable;
  double run = 0.0;
  for (Index i = 0; i < usable; ++i) {
    run += lam(i);
    if (run / total >= 1.0 - tol_pod) {
      m = i + 1;
      break;
    }
  }
  PodBasis basis;
  basis.space = &space;
  basis.tol_pod = tol_pod;
  basis.eigenvalues = lam;
  basis.modes.resize(space.size(), m);
  for (Index i = 0; i < m; ++i)
    basis.modes.col(i) = A * vec.col(i) / std::sqrt(lam(i));
  return basis;
}

MapSpace reduce_space(const MapSpace& full, const PodBasis& basis) {
  if (basis.space != &full)
    throw InputError("reduce_space: basis was built on a different space");
  return full.subspace(basis.modes);
}

std::vector<std::pair<int, double>> energy_curve(const PodBasis& basis) {
  const double total = basis.eigenvalues.sum();
  std::vector<std::pair<int, double>> out;
  out.reserve(basis.eigenvalues.size());
  double run = 0.0;
  for (Index i = 0; i < basis.eigenvalues.size(); ++i) {
    run += basis.eigenvalues(i);
    out.emplace_back(static_cast<int>(i + 1), std::max(0.0, 1.0 - run / total));
  }
  return out;
}

void save_pod_eigenvalues_csv(const std::string& path, const PodBasis& basis) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write eigenvalue csv: " + path);
  out << "m,eigenvalue,residual_energy\n";
  const auto curve = energy_curve(basis);
  for (std::size_t i = 0; i < curve.size(); ++i)
    out << curve[i].first << ',' << fmt17(basis.eigenvalues(static_cast<Index>(i))) << ','
        << fmt17(curve[i].second) << '\n';
}

}  // namespace grr
