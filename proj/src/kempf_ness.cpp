#include "gitstab/kempf_ness.hpp"

#include <algorithm>
#include <cmath>

#include "gitstab/rng.hpp"

namespace gitstab {

Direction::Direction(const TracelessSym& xi) {
  const double n = xi.norm();
  if (n <= 1e-12) throw ZeroDirection("Direction: zero matrix");
  xi_ = xi.scaled(1.0 / n);
}

TracelessSym moment_mu(const ProjPoint& x) {
  const int n1 = x.dim();
  Eigen::MatrixXd m = 0.5 * (x.coords() * x.coords().transpose() -
                             Eigen::MatrixXd::Identity(n1, n1) / n1);
  return TracelessSym(std::move(m));
}

TracelessSym grad_F(const AtomicMeasure& nu) {
  const int n1 = nu.dim();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n1, n1);
  for (const auto& a : nu.atoms()) {
    m += a.weight * a.point.coords() * a.point.coords().transpose();
  }
  m = 0.5 * (m - Eigen::MatrixXd::Identity(n1, n1) / n1);
  return TracelessSym(std::move(m));
}

double kn_function(const AtomicMeasure& nu, const SpecialLinear& g) {
  if (g.dim() != nu.dim()) throw DimensionMismatch("kn_function");
  double v = 0.0;
  for (const auto& a : nu.atoms()) {
    const double sq = (g.mat() * a.point.coords()).squaredNorm();
    if (sq <= 1e-24) throw SingularInput("kn_function: atom mapped to zero");
    v += a.weight * std::log(sq);
  }
  return 0.25 * v;
}

MorseBottDecomposition morse_bott(const AtomicMeasure& nu,
                                  const TracelessSym& xi, double group_tol) {
  if (xi.norm() <= 1e-12) throw ZeroDirection("morse_bott: zero direction");
  if (xi.dim() != nu.dim()) throw DimensionMismatch("morse_bott");
  MorseBottDecomposition mb;
  mb.spec = spectral(xi, group_tol);
  const int k = mb.spec.groups();
  std::vector<double> filtration(k + 1, 0.0);
  filtration[0] = 1.0;
  for (int j = 1; j < k; ++j) {
    filtration[j] = subspace_mass(nu, mb.spec.trailing_basis(j));
  }
  for (int j = 0; j < k; ++j) {
    mb.critical_values.push_back(0.5 * mb.spec.eigs[j]);
    mb.unstable_masses.push_back(filtration[j] - filtration[j + 1]);
  }
  return mb;
}

double maximal_weight(const AtomicMeasure& nu, const TracelessSym& xi) {
  const double n = xi.norm();
  if (n <= 1e-12) throw ZeroDirection("maximal_weight: zero direction");
  const MorseBottDecomposition mb = morse_bott(nu, xi.scaled(1.0 / n));
  double lambda = 0.0;
  for (size_t j = 0; j < mb.critical_values.size(); ++j) {
    lambda += mb.critical_values[j] * mb.unstable_masses[j];
  }
  return lambda;
}

double big_lambda(const AtomicMeasure& nu, const TracelessSym& xi) {
  const double n = xi.norm();
  if (n <= 1e-12) return 0.0;
  return n * maximal_weight(nu, xi);
}

double kn_geodesic_value(const AtomicMeasure& nu, const TracelessSym& xi_hat,
                         double t) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(xi_hat.mat());
  double v = 0.0;
  for (const auto& a : nu.atoms()) {
    const Eigen::VectorXd comp = es.eigenvectors().transpose() * a.point.coords();
    // log |exp(t xi) x|^2 = log sum_i c_i exp(2 t l_i), log-sum-exp form
    double top = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < comp.size(); ++i) {
      const double c = comp(i) * comp(i);
      if (c > 0.0) top = std::max(top, 2.0 * t * es.eigenvalues()(i));
    }
    double s = 0.0;
    for (int i = 0; i < comp.size(); ++i) {
      const double c = comp(i) * comp(i);
      if (c > 0.0) s += c * std::exp(2.0 * t * es.eigenvalues()(i) - top);
    }
    v += a.weight * (top + std::log(s));
  }
  return 0.25 * v;
}

double limit_slope(const AtomicMeasure& nu, const TracelessSym& xi,
                   double t_min) {
  const double n = xi.norm();
  if (n <= 1e-12) throw ZeroDirection("limit_slope: zero direction");
  const TracelessSym xh = xi.scaled(1.0 / n);
  // Pick the horizon from the slowest gap: the transient decays like
  // exp(-2 gap t), so 15/gap pushes it below ~1e-9 even with unfavorable
  // component ratios.
  const SpectralData sd = spectral(xh);
  double gap = std::numeric_limits<double>::infinity();
  for (int j = 0; j + 1 < sd.groups(); ++j) {
    gap = std::min(gap, sd.eigs[j] - sd.eigs[j + 1]);
  }
  double t = t_min;
  if (std::isfinite(gap) && gap > 0.0) t = std::max(t_min, 15.0 / gap);
  const double h = 0.5;
  return (kn_geodesic_value(nu, xh, t + h) - kn_geodesic_value(nu, xh, t - h)) /
         (2.0 * h);
}

Eigen::VectorXd abelian_moment(const AtomicMeasure& nu,
                               const Eigen::MatrixXd& frame) {
  const int n1 = nu.dim();
  if (frame.rows() != n1 || frame.cols() != n1) {
    throw DimensionMismatch("abelian_moment: frame shape");
  }
  if ((frame.transpose() * frame - Eigen::MatrixXd::Identity(n1, n1))
          .cwiseAbs()
          .maxCoeff() > 1e-9) {
    throw Error("abelian_moment: frame not orthonormal");
  }
  return (frame.transpose() * grad_F(nu).mat() * frame).diagonal();
}

double AxiomReport::max_residual() const {
  return std::max({cocycle, k_invariance, convexity_violation,
                   gradient_consistency, flatness_consistency,
                   lipschitz_excess});
}

namespace {

double psi_at(const AtomicMeasure& nu, const TracelessSym& xi, double t) {
  return kn_function(nu, exp_sym(xi.scaled(t)));
}

}  // namespace

AxiomReport axiom_residuals(const AtomicMeasure& nu, const SpecialLinear& g,
                            const SpecialLinear& h, const TracelessSym& xi,
                            const std::vector<double>& t_grid,
                            std::uint64_t k_seed) {
  AxiomReport rep;
  const int n1 = nu.dim();

  // (P4) cocycle
  rep.cocycle = std::abs(kn_function(nu, g) + kn_function(pushforward(g, nu), h) -
                         kn_function(nu, h * g));

  // (P2) left K-invariance with a seeded random rotation
  Rng rng(k_seed);
  const SpecialLinear k{Eigen::MatrixXd(rng.random_orthogonal(n1))};
  rep.k_invariance = std::abs(kn_function(nu, k * g) - kn_function(nu, g));

  // (P3) convexity along exp(t xi) over the grid
  if (t_grid.size() >= 3) {
    std::vector<double> f(t_grid.size());
    for (size_t i = 0; i < t_grid.size(); ++i) f[i] = psi_at(nu, xi, t_grid[i]);
    double min_curv = std::numeric_limits<double>::infinity();
    for (size_t i = 1; i + 1 < t_grid.size(); ++i) {
      const double hl = t_grid[i] - t_grid[i - 1];
      const double hr = t_grid[i + 1] - t_grid[i];
      const double curv =
          2.0 * (hl * f[i + 1] - (hl + hr) * f[i] + hr * f[i - 1]) /
          (hl * hr * (hl + hr));
      min_curv = std::min(min_curv, curv);
    }
    rep.convexity_violation = std::max(0.0, -min_curv);
  }

  // gradient consistency: five-point slope at t = 0 vs <grad_F, xi>
  {
    const double fd_h = 1e-3;
    const double slope = (psi_at(nu, xi, -2 * fd_h) - 8 * psi_at(nu, xi, -fd_h) +
                          8 * psi_at(nu, xi, fd_h) - psi_at(nu, xi, 2 * fd_h)) /
                         (12 * fd_h);
    const double pairing = (grad_F(nu).mat() * xi.mat()).trace();
    rep.gradient_consistency = std::abs(slope - pairing);
  }

  // flatness <=> fixed atoms: measured curvature at 0 against the
  // fixed-atom defect sum w_i |xi x - (x^T xi x) x|^2 (they are equal, and
  // both vanish exactly when every atom is a fixed point of the flow)
  {
    const double fd_h = 1e-3;
    const double fd2 =
        (-psi_at(nu, xi, -2 * fd_h) + 16 * psi_at(nu, xi, -fd_h) -
         30 * psi_at(nu, xi, 0.0) + 16 * psi_at(nu, xi, fd_h) -
         psi_at(nu, xi, 2 * fd_h)) /
        (12 * fd_h * fd_h);
    double defect = 0.0;
    bool all_fixed = true;
    for (const auto& a : nu.atoms()) {
      const Eigen::VectorXd& x = a.point.coords();
      const Eigen::VectorXd r = xi.mat() * x - x.dot(xi.mat() * x) * x;
      defect += a.weight * r.squaredNorm();
      if (r.norm() > 1e-8) all_fixed = false;
    }
    rep.flatness_consistency = std::abs(fd2 - defect) / (1.0 + std::abs(defect));
    rep.second_derivative_zero = std::abs(fd2) <= 1e-8;
    rep.all_atoms_fixed = all_fixed;
  }

  // (P6) slopes bounded by the gradient-map norm bound |xi|_F / 2
  if (t_grid.size() >= 2) {
    const double bound = 0.5 * xi.norm();
    double worst = 0.0;
    const double fd_h = 1e-3;
    for (double t : t_grid) {
      const double slope =
          (psi_at(nu, xi, t + fd_h) - psi_at(nu, xi, t - fd_h)) / (2 * fd_h);
      worst = std::max(worst, std::abs(slope));
    }
    rep.lipschitz_excess = std::max(0.0, worst - bound);
  }

  return rep;
}

}  // namespace gitstab
