#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>

#include "gitstab/linalg.hpp"

namespace gitstab {

/// Deterministic random source. mt19937_64 has a fully specified output
/// sequence and the distributions below are hand-rolled, so identical seeds
/// give identical streams on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() {  // [0, 1)
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  int uniform_int(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(engine_() % static_cast<std::uint64_t>(hi - lo + 1));
  }

  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * M_PI * u2);
    have_spare_ = true;
    return r * std::cos(2.0 * M_PI * u2);
  }

  Eigen::VectorXd gaussian_vector(int n) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = gaussian();
    return v;
  }

  Eigen::MatrixXd gaussian_matrix(int r, int c) {
    Eigen::MatrixXd m(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) m(i, j) = gaussian();
    return m;
  }

  /// Haar-ish random element of SO(n).
  Eigen::MatrixXd random_orthogonal(int n) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian_matrix(n, n));
    Eigen::MatrixXd q = qr.householderQ();
    Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < n; ++i) {
      if (r(i, i) < 0.0) q.col(i) *= -1.0;
    }
    if (q.determinant() < 0.0) q.col(0) *= -1.0;
    return q;
  }

  /// Random unit-Frobenius traceless symmetric matrix.
  TracelessSym random_direction(int n_plus_1) {
    TracelessSym xi(gaussian_matrix(n_plus_1, n_plus_1));
    while (xi.norm() <= 1e-8) {
      xi = TracelessSym(gaussian_matrix(n_plus_1, n_plus_1));
    }
    return xi.scaled(1.0 / xi.norm());
  }

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace gitstab
