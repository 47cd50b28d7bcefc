#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gitstab/kempf_ness.hpp"
#include "gitstab/measure.hpp"

namespace gitstab {

enum class StabilityKind {
  Stable,
  PolystableNotStable,
  SemistableNotPolystable,
  Unstable,
};

std::string to_string(StabilityKind k);

struct SplittingPiece {
  SupportFlat flat;
  double inner_margin = 0.0;  // stable margin of the renormalized restriction
};

struct StabilityVerdict {
  StabilityKind kind = StabilityKind::Stable;
  /// True when the verdict is decisive: exact arithmetic, or a float run
  /// whose comparisons all cleared the equality tolerance.
  bool certified = false;
  /// Float mode hit a mass == dim/(n+1) equality only within tolerance.
  bool needs_exact = false;
  bool exact = false;    // rational arithmetic was used
  bool sampled = false;  // Monte-Carlo path (never certified)

  double margin = 0.0;   // Stable: min over proper flats of dim/(n+1) - mass
  std::optional<SupportFlat> witness_flat;        // violation or equality flat
  std::optional<TracelessSym> witness_direction;  // Unstable only
  std::vector<SplittingPiece> splitting;          // PolystableNotStable only
};

struct ClassifyOptions {
  double membership_tol = kMembershipTol;
  double equality_tol = 1e-9;
  /// Use the rational path when the measure carries exact data.
  bool prefer_exact = true;
};

/// Decides the stability class of nu from its support flats: stable iff
/// every proper flat has mass < dim/(n+1), unstable iff some flat exceeds
/// its bound, and otherwise polystable or merely semistable according to
/// whether the tight flats admit a splitting of R^{n+1} into independent
/// pieces covering the support with each renormalized restriction stable.
StabilityVerdict classify(const AtomicMeasure& nu,
                          const ClassifyOptions& opt = {});

/// Unit direction contracting the overweight flat: proportional to
/// d P_{L\perp} - (n+1-d) P_L. Requires mass > dim/(n+1).
Direction destabilizing_direction(const AtomicMeasure& nu,
                                  const SupportFlat& flat);

struct CrossCheckReport {
  double min_random = 0.0;
  double min_flat_derived = 0.0;
  double min_abelian = 0.0;
  std::optional<double> witness_lambda;
  int flat_direction_count = 0;
  bool consistent = false;
  std::string detail;
};

/// Evaluates the maximal weight over random unit directions, the
/// flat-derived candidate family (sign patterns over chains of nested
/// support flats), and frame-diagonal abelian restrictions, then checks the
/// sign pattern against the combinatorial verdict. Inconsistencies are
/// reported loudly in `detail`.
CrossCheckReport numerical_cross_check(const AtomicMeasure& nu,
                                       const StabilityVerdict& verdict,
                                       int n_samples, std::uint64_t seed = 0);

/// Directions derived from the support-flat chains of nu (the candidate
/// minimizers of the maximal weight).
std::vector<TracelessSym> flat_derived_directions(
    const AtomicMeasure& nu, const std::vector<SupportFlat>& flats);

/// Monte-Carlo classification for measures beyond the enumeration guard:
/// random atom subsets propose flats; the verdict is marked sampled and
/// never certified.
StabilityVerdict classify_sampled(const AtomicMeasure& nu, int n_samples,
                                  std::uint64_t seed = 0,
                                  const ClassifyOptions& opt = {});

/// Re-verifies a verdict's witness payload against the measure (used by
/// tests and the CLI report). Returns an empty string when everything
/// checks out, else a description of the failure.
std::string verify_verdict(const AtomicMeasure& nu,
                           const StabilityVerdict& verdict);

}  // namespace gitstab
