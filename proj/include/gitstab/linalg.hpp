#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "gitstab/errors.hpp"

namespace gitstab {

/// Element of sym0(n+1), the traceless symmetric matrices. Construction
/// symmetrizes and removes the trace, so stored entries satisfy both
/// invariants exactly up to roundoff.
class TracelessSym {
 public:
  TracelessSym() = default;
  explicit TracelessSym(Eigen::MatrixXd m, double* adjustment = nullptr);

  static TracelessSym zero(int n_plus_1);

  const Eigen::MatrixXd& mat() const { return m_; }
  int dim() const { return static_cast<int>(m_.rows()); }
  double norm() const { return m_.norm(); }

  TracelessSym operator+(const TracelessSym& o) const;
  TracelessSym operator-() const;
  TracelessSym scaled(double s) const;

 private:
  Eigen::MatrixXd m_;
};

/// Element of SL(n+1,R). Construction renormalizes determinant drift up to
/// 1e-6 and rejects anything farther from det 1.
class SpecialLinear {
 public:
  explicit SpecialLinear(Eigen::MatrixXd m);

  static SpecialLinear identity(int n_plus_1);
  /// Rescales an arbitrary invertible matrix to determinant one. For even
  /// ambient dimension a negative determinant cannot be fixed by scaling;
  /// the first column is flipped first (a projectively harmless change).
  static SpecialLinear normalized(Eigen::MatrixXd m);
  /// Wraps without the determinant check. For matrices whose unit
  /// determinant holds by construction but is not numerically evaluable
  /// (extreme singular-value spread after geodesic escape).
  static SpecialLinear trusted(Eigen::MatrixXd m);

  const Eigen::MatrixXd& mat() const { return m_; }
  int dim() const { return static_cast<int>(m_.rows()); }

  SpecialLinear operator*(const SpecialLinear& o) const;
  SpecialLinear inverse() const;

 private:
  struct unchecked_t {};
  SpecialLinear(Eigen::MatrixXd m, unchecked_t) : m_(std::move(m)) {}
  Eigen::MatrixXd m_;
};

/// Eigenvalues of a traceless symmetric matrix merged into strictly
/// descending groups, with orthonormal bases of the grouped eigenspaces.
struct SpectralData {
  std::vector<double> eigs;               // distinct, strictly descending
  std::vector<Eigen::MatrixXd> spaces;    // (n+1) x dim_j, orthonormal columns
  double group_tol = 0.0;

  int groups() const { return static_cast<int>(eigs.size()); }
  int space_dim(int j) const { return static_cast<int>(spaces[j].cols()); }
  /// Orthonormal basis of V_j + V_{j+1} + ... + V_{k-1} (trailing sum).
  Eigen::MatrixXd trailing_basis(int j) const;
  Eigen::MatrixXd reconstruct() const;
};

/// exp of a traceless symmetric matrix, computed spectrally. Lands in
/// SL(n+1,R) because det = e^{tr} = 1.
SpecialLinear exp_sym(const TracelessSym& xi);

/// Polar (Cartan) factorization g = k exp(xi) with k orthogonal and
/// xi = 1/2 log(g^T g). Throws SingularInput when g^T g is numerically
/// singular.
std::pair<SpecialLinear, TracelessSym> polar_cartan(const SpecialLinear& g);

/// Tolerance-grouped spectral decomposition. group_tol <= 0 selects the
/// default 1e-8 * (1 + |xi|_F). Grouping is the transitive closure of
/// |l_i - l_j| <= group_tol on the sorted eigenvalue list.
SpectralData spectral(const TracelessSym& xi, double group_tol = -1.0);

/// Deterministic sign fix: first coordinate with |c| > 1e-12 made positive.
void canonicalize_column_signs(Eigen::MatrixXd& m);

}  // namespace gitstab
