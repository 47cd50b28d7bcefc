#pragma once

#include <gmpxx.h>

#include <optional>
#include <string>
#include <vector>

namespace gitstab {

using Rat = mpq_class;
using RatVec = std::vector<Rat>;
using RatMat = std::vector<RatVec>;  // row-major

/// Parses "p/q", "p", or a plain integer literal. Returns nullopt on
/// malformed input or zero denominator.
std::optional<Rat> parse_rational(const std::string& s);

double to_double(const Rat& r);

/// Rank of the row span, by exact Gaussian elimination.
int rat_rank(RatMat rows);

/// Whether v lies in the row span of rows.
bool rat_in_span(const RatMat& rows, const RatVec& v);

/// Coordinates of v in the given row basis (rows must be independent and
/// v must lie in their span; both are the caller's responsibility).
RatVec rat_solve_coords(const RatMat& basis_rows, const RatVec& v);

/// Projective equality over Q: all 2x2 minors of (a | b) vanish.
bool rat_parallel(const RatVec& a, const RatVec& b);

/// Exact mirror of an atomic measure: raw (unnormalized) rational
/// representative vectors and rational weights, in the same order as the
/// float-side atoms.
struct ExactAtom {
  RatVec coords;
  Rat weight;
};

struct ExactMeasureData {
  int n_plus_1 = 0;
  std::vector<ExactAtom> atoms;
};

}  // namespace gitstab
