#include "gitstab/linalg.hpp"

#include <cmath>

namespace gitstab {

TracelessSym::TracelessSym(Eigen::MatrixXd m, double* adjustment) {
  if (m.rows() != m.cols() || m.rows() < 2) {
    throw DimensionMismatch("TracelessSym wants a square matrix of size >= 2");
  }
  const int n1 = static_cast<int>(m.rows());
  Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  sym.diagonal().array() -= sym.trace() / n1;
  if (adjustment != nullptr) *adjustment = (sym - m).norm();
  m_ = std::move(sym);
}

TracelessSym TracelessSym::zero(int n_plus_1) {
  return TracelessSym(Eigen::MatrixXd::Zero(n_plus_1, n_plus_1));
}

TracelessSym TracelessSym::operator+(const TracelessSym& o) const {
  return TracelessSym(m_ + o.m_);
}

TracelessSym TracelessSym::operator-() const { return TracelessSym(-m_); }

TracelessSym TracelessSym::scaled(double s) const { return TracelessSym(s * m_); }

SpecialLinear::SpecialLinear(Eigen::MatrixXd m) {
  if (m.rows() != m.cols() || m.rows() < 2) {
    throw DimensionMismatch("SpecialLinear wants a square matrix of size >= 2");
  }
  const double det = m.determinant();
  if (std::abs(det - 1.0) > 1e-6) {
    throw Error("SpecialLinear: determinant " + std::to_string(det) +
                " too far from 1");
  }
  m /= std::pow(det, 1.0 / static_cast<double>(m.rows()));
  m_ = std::move(m);
}

SpecialLinear SpecialLinear::identity(int n_plus_1) {
  return SpecialLinear(Eigen::MatrixXd::Identity(n_plus_1, n_plus_1),
                       unchecked_t{});
}

SpecialLinear SpecialLinear::normalized(Eigen::MatrixXd m) {
  if (m.rows() != m.cols() || m.rows() < 2) {
    throw DimensionMismatch("SpecialLinear wants a square matrix of size >= 2");
  }
  const int n1 = static_cast<int>(m.rows());
  double det = m.determinant();
  if (det == 0.0 || !std::isfinite(det)) {
    throw SingularInput("SpecialLinear::normalized: singular matrix");
  }
  if (det < 0.0) {
    if (n1 % 2 == 0) {
      m.col(0) *= -1.0;
      det = -det;
    }
    // odd n1: the signed real root below handles det < 0
  }
  const double scale =
      std::copysign(std::pow(std::abs(det), 1.0 / n1), det);
  return SpecialLinear(m / scale, unchecked_t{});
}

SpecialLinear SpecialLinear::trusted(Eigen::MatrixXd m) {
  if (m.rows() != m.cols() || m.rows() < 2) {
    throw DimensionMismatch("SpecialLinear wants a square matrix of size >= 2");
  }
  return SpecialLinear(std::move(m), unchecked_t{});
}

SpecialLinear SpecialLinear::operator*(const SpecialLinear& o) const {
  if (dim() != o.dim()) throw DimensionMismatch("SpecialLinear product");
  return SpecialLinear(m_ * o.m_, unchecked_t{});
}

SpecialLinear SpecialLinear::inverse() const {
  return SpecialLinear(m_.inverse(), unchecked_t{});
}

void canonicalize_column_signs(Eigen::MatrixXd& m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      const double v = m(r, c);
      if (std::abs(v) > 1e-12) {
        if (v < 0.0) m.col(c) *= -1.0;
        break;
      }
    }
  }
}

Eigen::MatrixXd SpectralData::trailing_basis(int j) const {
  const int n1 = static_cast<int>(spaces.front().rows());
  int cols = 0;
  for (int i = j; i < groups(); ++i) cols += space_dim(i);
  Eigen::MatrixXd b(n1, cols);
  int at = 0;
  for (int i = j; i < groups(); ++i) {
    b.middleCols(at, space_dim(i)) = spaces[i];
    at += space_dim(i);
  }
  return b;
}

Eigen::MatrixXd SpectralData::reconstruct() const {
  const int n1 = static_cast<int>(spaces.front().rows());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n1, n1);
  for (int j = 0; j < groups(); ++j) {
    m += eigs[j] * spaces[j] * spaces[j].transpose();
  }
  return m;
}

SpectralData spectral(const TracelessSym& xi, double group_tol) {
  const int n1 = xi.dim();
  if (group_tol <= 0.0) group_tol = 1e-8 * (1.0 + xi.norm());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(xi.mat());
  if (es.info() != Eigen::Success) {
    throw Error("spectral: eigensolver failed");
  }
  // Eigen returns ascending eigenvalues; walk descending and chain-merge
  // adjacent values closer than group_tol (transitive closure on the sorted
  // list).
  SpectralData out;
  out.group_tol = group_tol;
  int hi = n1 - 1;
  while (hi >= 0) {
    int lo = hi;
    while (lo > 0 &&
           es.eigenvalues()(lo) - es.eigenvalues()(lo - 1) <= group_tol) {
      --lo;
    }
    const int dim = hi - lo + 1;
    double mean = 0.0;
    Eigen::MatrixXd basis(n1, dim);
    for (int c = 0; c < dim; ++c) {
      mean += es.eigenvalues()(lo + c);
      basis.col(dim - 1 - c) = es.eigenvectors().col(lo + c);
    }
    canonicalize_column_signs(basis);
    out.eigs.push_back(mean / dim);
    out.spaces.push_back(std::move(basis));
    hi = lo - 1;
  }
  // Re-center the grouped values so the weighted sum is exactly traceless.
  double tr = 0.0;
  for (int j = 0; j < out.groups(); ++j) tr += out.eigs[j] * out.space_dim(j);
  for (double& e : out.eigs) e -= tr / n1;
  return out;
}

SpecialLinear exp_sym(const TracelessSym& xi) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(xi.mat());
  if (es.info() != Eigen::Success) {
    throw Error("exp_sym: eigensolver failed");
  }
  Eigen::VectorXd el = es.eigenvalues().array().exp();
  Eigen::MatrixXd m =
      es.eigenvectors() * el.asDiagonal() * es.eigenvectors().transpose();
  return SpecialLinear(std::move(m));
}

std::pair<SpecialLinear, TracelessSym> polar_cartan(const SpecialLinear& g) {
  const Eigen::MatrixXd s = g.mat().transpose() * g.mat();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
  if (es.info() != Eigen::Success) {
    throw Error("polar_cartan: eigensolver failed");
  }
  const double floor = 1e-12 * std::max(1.0, es.eigenvalues().maxCoeff());
  if (es.eigenvalues().minCoeff() <= floor) {
    throw SingularInput("polar_cartan: g^T g numerically singular");
  }
  Eigen::VectorXd half_log = 0.5 * es.eigenvalues().array().log();
  Eigen::MatrixXd xi_m = es.eigenvectors() * half_log.asDiagonal() *
                         es.eigenvectors().transpose();
  TracelessSym xi(std::move(xi_m));
  Eigen::VectorXd inv_sqrt = (-half_log.array()).exp();
  Eigen::MatrixXd k = g.mat() * es.eigenvectors() * inv_sqrt.asDiagonal() *
                      es.eigenvectors().transpose();
  return {SpecialLinear(std::move(k)), std::move(xi)};
}

}  // namespace gitstab
