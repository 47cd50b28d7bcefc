#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gitstab/kempf_ness.hpp"
#include "gitstab/measure.hpp"

namespace gitstab {

enum class BalanceStatus { Converged, Diverged, MaxIterations };

std::string to_string(BalanceStatus s);

struct TraceEntry {
  double psi = 0.0;       // Kempf-Ness value at the current transform
  double residual = 0.0;  // |grad_F(g nu)|_F
  double step = 0.0;      // accepted step size of the previous move
};

struct BalanceResult {
  SpecialLinear g;
  double residual = 0.0;
  int iterations = 0;
  BalanceStatus status = BalanceStatus::MaxIterations;
  std::vector<TraceEntry> trace;
  /// Normalized polar part of g at divergence: the direction of geodesic
  /// escape.
  std::optional<TracelessSym> escape_direction;
};

struct BalanceOptions {
  double tol = 1e-10;
  int max_iter = 10000;
  // |polar part| beyond which the run is declared escaping. Atom images
  // underflow the pushforward guard near 28 in IEEE doubles, so the bound
  // sits safely below that wall.
  double divergence_norm = 20.0;
  double residual_floor = 1e-6;    // only declare divergence above this
  bool record_trace = true;
};

/// Minimizes g -> Psi(nu, g) by geodesic descent along -grad_F(g nu) with
/// Armijo backtracking (factor 1/2, sufficient decrease 1e-4, initial step
/// one). Converged means |grad_F(g nu)|_F <= tol; Diverged means the polar
/// part escaped past divergence_norm with the residual still above
/// residual_floor.
BalanceResult balance(const AtomicMeasure& nu, const BalanceOptions& opt = {});

/// |sum_i w_i (g x_i)(g x_i)^T / |g x_i|^2 - Id/(n+1)|_F, the defect from
/// radial isotropic position; equals 2 |grad_F(g nu)|_F.
double isotropy_check(const AtomicMeasure& nu, const SpecialLinear& g);

struct PropernessSample {
  double lambda = 0.0;      // maximal weight of the direction
  double tail_slope = 0.0;  // secant slope over the second half of [0, t_max]
  bool holds = false;
};

struct PropernessReport {
  double c1 = 0.0;
  double c2 = 0.0;
  bool holds = false;
  std::vector<PropernessSample> per_direction;
};

/// Samples Psi(nu, exp(t xi)) over [0, t_max] for each direction and fits
/// the smallest constants with |t xi| <= c1 Psi + c2 on the sample. The
/// bound holds exactly when every sampled asymptotic slope is positive.
PropernessReport linear_properness_probe(const AtomicMeasure& nu,
                                         const std::vector<Direction>& directions,
                                         double t_max);

/// Sends the splitting pieces onto mutually orthogonal coordinate blocks
/// and balances each renormalized piece inside its block; the returned
/// transform zeroes the gradient map of the whole measure.
SpecialLinear balance_splitting(const AtomicMeasure& nu,
                                const std::vector<SupportFlat>& pieces,
                                const BalanceOptions& opt = {});

}  // namespace gitstab
