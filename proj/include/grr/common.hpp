#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace grr {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Eigen::Vector2d;
using Eigen::Vector3d;
using Eigen::Matrix2d;

/// Row-major matrix for per-point buffers indexed as row(q).data().
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Index = Eigen::Index;

/// Thrown when an input file or configuration is malformed.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Thrown when a numerical routine cannot proceed (singular system, infeasible
/// constraints, point outside its domain).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Deterministic summation: the result depends only on the order of `terms`,
/// never on thread count or chunking.  Parallel loops write per-item terms
/// into a buffer and reduce through this.
double pairwise_sum(std::span<const double> terms);

/// Counter-based uniform doubles in [0,1). mt19937_64 stream with an explicit
/// bit-to-double mapping so outputs are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

  double uniform() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal via Box-Muller (deterministic pairing).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform(), u2 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }
  std::uint64_t next() {
    // xorshift* step seeded from splitmix-initialized state
    std::uint64_t x = state_;
    x ^= x >> 12;
    x ^= x << 25;
    x ^= x >> 27;
    state_ = x;
    return x * 0x2545f4914f6cdd1dull;
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

/// Format a double with 17 significant digits (round-trip exact).
std::string fmt17(double v);

inline double sq(double v) { return v * v; }

}  // namespace grr
