#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "gitstab/linalg.hpp"
#include "gitstab/measure.hpp"

namespace gitstab {

/// Unit-Frobenius traceless symmetric matrix: a point of the sphere of
/// directions in the symmetric space, standing in for the boundary point it
/// determines.
class Direction {
 public:
  explicit Direction(const TracelessSym& xi);
  const TracelessSym& xi() const { return xi_; }

 private:
  TracelessSym xi_;
};

/// Gradient map of a single projective point:
/// mu(x) = (x x^T - Id/(n+1)) / 2 for unit x. Its Frobenius norm is the
/// constant sqrt(n/(n+1))/2 over all of RP^n.
TracelessSym moment_mu(const ProjPoint& x);

/// Gradient map of the measure: the mu-barycenter sum_i w_i mu(x_i).
TracelessSym grad_F(const AtomicMeasure& nu);

/// Kempf-Ness function: (1/4) sum_i w_i log |g x_i|^2. Zero at g = Id,
/// left SO(n+1)-invariant, and a cocycle in g.
double kn_function(const AtomicMeasure& nu, const SpecialLinear& g);

/// Masses of the unstable manifolds of the gradient flow along xi, with the
/// critical values c_j = lambda_j / 2.
struct MorseBottDecomposition {
  SpectralData spec;
  std::vector<double> critical_values;   // lambda_j / 2
  std::vector<double> unstable_masses;   // nu(W_j), summing to 1
};

MorseBottDecomposition morse_bott(const AtomicMeasure& nu,
                                  const TracelessSym& xi,
                                  double group_tol = -1.0);

/// Asymptotic slope of t -> Psi(nu, exp(t xi/|xi|)); equals
/// sum_j c_j nu(W_j) over the Morse-Bott data of the normalized direction.
double maximal_weight(const AtomicMeasure& nu, const TracelessSym& xi);

/// Degree-one homogeneous extension |xi| * maximal_weight(nu, xi), with
/// value 0 at xi = 0.
double big_lambda(const AtomicMeasure& nu, const TracelessSym& xi);

/// Psi(nu, exp(t xi_hat)) evaluated in log-sum-exp form on the raw
/// (ungrouped) eigen-decomposition of xi_hat, stable for arbitrarily large t.
double kn_geodesic_value(const AtomicMeasure& nu, const TracelessSym& xi_hat,
                         double t);

/// Central-difference slope of t -> Psi(nu, exp(t xi/|xi|)) at a horizon
/// far enough past the slowest spectral gap for the transient to sit below
/// 1e-8. Pass t_min to force at least that horizon.
double limit_slope(const AtomicMeasure& nu, const TracelessSym& xi,
                   double t_min = 40.0);

/// Diagonal of frame^T grad_F(nu) frame: the gradient map of the abelian
/// subgroup diagonal in the given orthonormal frame. Entries sum to zero.
Eigen::VectorXd abelian_moment(const AtomicMeasure& nu,
                               const Eigen::MatrixXd& frame);

/// Residuals of the Kempf-Ness axioms on one instance. Each field is a
/// defect magnitude; zero (up to numerics) means the axiom holds.
struct AxiomReport {
  double cocycle = 0.0;                // P4
  double k_invariance = 0.0;           // P2
  double convexity_violation = 0.0;    // P3: negative curvature found
  double gradient_consistency = 0.0;   // slope at 0 vs <grad_F, xi>
  double flatness_consistency = 0.0;   // curvature at 0 vs fixed-atom defect
  double lipschitz_excess = 0.0;       // P6: slope beyond the mu bound
  bool second_derivative_zero = false;
  bool all_atoms_fixed = false;

  double max_residual() const;
};

/// Runs the axiom checks for (nu, g, h, xi) over the given t grid. The
/// orthogonal element for the K-invariance check is drawn from k_seed.
AxiomReport axiom_residuals(const AtomicMeasure& nu, const SpecialLinear& g,
                            const SpecialLinear& h, const TracelessSym& xi,
                            const std::vector<double>& t_grid,
                            std::uint64_t k_seed = 0);

}  // namespace gitstab
