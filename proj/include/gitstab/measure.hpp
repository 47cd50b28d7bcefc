#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "gitstab/errors.hpp"
#include "gitstab/linalg.hpp"
#include "gitstab/rational.hpp"

namespace gitstab {

inline constexpr double kAtomMergeTol = 1e-10;     // projective distance
inline constexpr double kMembershipTol = 1e-9;     // |x - P x|
inline constexpr int kSupportFlatsGuard = 24;      // max atoms for enumeration

/// Point of RP^n stored as a unit vector with canonical sign (first
/// coordinate with |c| > 1e-12 positive).
class ProjPoint {
 public:
  explicit ProjPoint(Eigen::VectorXd v);

  const Eigen::VectorXd& coords() const { return v_; }
  int dim() const { return static_cast<int>(v_.size()); }

  /// 1 - |<x,y>|, zero exactly on projective equality of unit vectors.
  static double proj_dist(const ProjPoint& a, const ProjPoint& b);

 private:
  Eigen::VectorXd v_;
};

struct Atom {
  ProjPoint point;
  double weight;
};

/// Finite atomic probability measure on RP^n. Construction merges atoms
/// closer than kAtomMergeTol, requires positive weights, and renormalizes
/// the total mass to one (rejecting totals farther than 1e-9 from one
/// unless `renormalize` is set).
class AtomicMeasure {
 public:
  AtomicMeasure(int n_plus_1, std::vector<Atom> atoms, bool renormalize = false);

  int dim() const { return n_plus_1_; }  // ambient n+1
  const std::vector<Atom>& atoms() const { return atoms_; }
  int size() const { return static_cast<int>(atoms_.size()); }

  bool has_exact() const { return exact_.has_value(); }
  const ExactMeasureData& exact() const { return *exact_; }
  /// Attaches exact data (loader/exact-pushforward use); atoms must match
  /// the float view one-to-one in order.
  void set_exact(ExactMeasureData data);

 private:
  int n_plus_1_;
  std::vector<Atom> atoms_;
  std::optional<ExactMeasureData> exact_;
};

/// A linear subspace spanned by atoms of the measure, with its full atom
/// membership. 1 <= dim <= n.
struct SupportFlat {
  Eigen::MatrixXd basis;            // (n+1) x dim, orthonormal columns
  int dim = 0;
  double mass = 0.0;
  std::vector<int> atom_indices;    // ascending
  std::uint32_t member_mask = 0;    // bit i set iff atom i in the flat
};

/// Image measure under g: atoms [g x_i], weights kept, projective
/// collisions merged. Carries exact data forward only when `g` has an
/// exact counterpart (see pushforward_exact).
AtomicMeasure pushforward(const SpecialLinear& g, const AtomicMeasure& nu);

/// Exact-mode pushforward by a rational invertible matrix.
AtomicMeasure pushforward_exact(const RatMat& g, const AtomicMeasure& nu);

/// Total weight of atoms lying in the span of the given orthonormal basis.
double subspace_mass(const AtomicMeasure& nu, const Eigen::MatrixXd& basis,
                     double membership_tol = kMembershipTol);

/// All distinct subspaces spanned by nonempty subsets of atoms, of proper
/// dimension (<= n), each with complete membership, dimension and mass.
/// Throws TooManyAtoms beyond kSupportFlatsGuard atoms.
std::vector<SupportFlat> support_flats(const AtomicMeasure& nu,
                                       double membership_tol = kMembershipTol);

/// Orthonormal basis of the span of the selected atoms (modified
/// Gram-Schmidt, residual threshold = membership_tol).
Eigen::MatrixXd atom_span_basis(const AtomicMeasure& nu,
                                const std::vector<int>& indices,
                                double membership_tol = kMembershipTol);

}  // namespace gitstab
