#include "gitstab/measure.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>

namespace gitstab {

ProjPoint::ProjPoint(Eigen::VectorXd v) {
  if (v.size() < 2) throw DimensionMismatch("ProjPoint wants dimension >= 2");
  const double n = v.norm();
  if (n <= 1e-12) throw SingularInput("ProjPoint: vanishing representative");
  v /= n;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-12) {
      if (v(i) < 0.0) v = -v;
      break;
    }
  }
  v_ = std::move(v);
}

double ProjPoint::proj_dist(const ProjPoint& a, const ProjPoint& b) {
  return 1.0 - std::abs(a.coords().dot(b.coords()));
}

AtomicMeasure::AtomicMeasure(int n_plus_1, std::vector<Atom> atoms,
                             bool renormalize)
    : n_plus_1_(n_plus_1) {
  if (n_plus_1 < 2) throw DimensionMismatch("AtomicMeasure wants n >= 1");
  if (atoms.empty()) throw Error("AtomicMeasure: no atoms");
  std::vector<Atom> merged;
  for (auto& a : atoms) {
    if (a.point.dim() != n_plus_1) {
      throw DimensionMismatch("AtomicMeasure: atom dimension mismatch");
    }
    if (!(a.weight > 0.0)) throw Error("AtomicMeasure: weights must be > 0");
    bool found = false;
    for (auto& m : merged) {
      if (ProjPoint::proj_dist(m.point, a.point) <= kAtomMergeTol) {
        m.weight += a.weight;
        found = true;
        break;
      }
    }
    if (!found) merged.push_back(std::move(a));
  }
  double total = 0.0;
  for (const auto& m : merged) total += m.weight;
  if (!renormalize && std::abs(total - 1.0) > 1e-9) {
    throw Error("AtomicMeasure: weights sum to " + std::to_string(total));
  }
  for (auto& m : merged) m.weight /= total;
  atoms_ = std::move(merged);
}

void AtomicMeasure::set_exact(ExactMeasureData data) {
  if (static_cast<int>(data.atoms.size()) != size() ||
      data.n_plus_1 != n_plus_1_) {
    throw DimensionMismatch("set_exact: shape mismatch with float view");
  }
  exact_ = std::move(data);
}

AtomicMeasure pushforward(const SpecialLinear& g, const AtomicMeasure& nu) {
  if (g.dim() != nu.dim()) throw DimensionMismatch("pushforward");
  std::vector<Atom> out;
  out.reserve(nu.size());
  for (const auto& a : nu.atoms()) {
    Eigen::VectorXd y = g.mat() * a.point.coords();
    if (y.norm() <= 1e-12) {
      throw SingularInput("pushforward: atom mapped to zero");
    }
    out.push_back({ProjPoint(std::move(y)), a.weight});
  }
  return AtomicMeasure(nu.dim(), std::move(out));
}

AtomicMeasure pushforward_exact(const RatMat& g, const AtomicMeasure& nu) {
  if (!nu.has_exact()) throw Error("pushforward_exact: measure lacks exact data");
  const int n1 = nu.dim();
  if (static_cast<int>(g.size()) != n1) throw DimensionMismatch("pushforward_exact");

  std::vector<ExactAtom> mapped;
  for (const auto& ea : nu.exact().atoms) {
    RatVec y(n1, Rat(0));
    for (int r = 0; r < n1; ++r) {
      for (int c = 0; c < n1; ++c) y[r] += g[r][c] * ea.coords[c];
    }
    bool zero = true;
    for (const auto& v : y) {
      if (v != 0) { zero = false; break; }
    }
    if (zero) throw SingularInput("pushforward_exact: atom mapped to zero");
    mapped.push_back({std::move(y), ea.weight});
  }
  // Merge exactly parallel atoms, then rebuild the float view from the
  // merged exact list so both sides stay aligned.
  std::vector<ExactAtom> merged;
  for (auto& ea : mapped) {
    bool found = false;
    for (auto& m : merged) {
      if (rat_parallel(m.coords, ea.coords)) {
        m.weight += ea.weight;
        found = true;
        break;
      }
    }
    if (!found) merged.push_back(std::move(ea));
  }
  std::vector<Atom> atoms;
  for (const auto& m : merged) {
    Eigen::VectorXd v(n1);
    for (int i = 0; i < n1; ++i) v(i) = to_double(m.coords[i]);
    atoms.push_back({ProjPoint(std::move(v)), to_double(m.weight)});
  }
  AtomicMeasure out(n1, std::move(atoms));
  if (out.size() != static_cast<int>(merged.size())) {
    throw Error("pushforward_exact: float-side merge diverged from exact merge");
  }
  out.set_exact({n1, std::move(merged)});
  return out;
}

double subspace_mass(const AtomicMeasure& nu, const Eigen::MatrixXd& basis,
                     double membership_tol) {
  if (basis.rows() != nu.dim()) throw DimensionMismatch("subspace_mass");
  if ((basis.transpose() * basis -
       Eigen::MatrixXd::Identity(basis.cols(), basis.cols()))
          .cwiseAbs()
          .maxCoeff() > 1e-9) {
    throw Error("subspace_mass: basis not orthonormal");
  }
  double mass = 0.0;
  for (const auto& a : nu.atoms()) {
    const Eigen::VectorXd& x = a.point.coords();
    if ((x - basis * (basis.transpose() * x)).norm() <= membership_tol) {
      mass += a.weight;
    }
  }
  return mass;
}

Eigen::MatrixXd atom_span_basis(const AtomicMeasure& nu,
                                const std::vector<int>& indices,
                                double membership_tol) {
  const int n1 = nu.dim();
  Eigen::MatrixXd basis(n1, std::min<size_t>(indices.size(), n1));
  int rank = 0;
  for (int idx : indices) {
    Eigen::VectorXd r = nu.atoms()[idx].point.coords();
    for (int c = 0; c < rank; ++c) r -= basis.col(c).dot(r) * basis.col(c);
    // second MGS pass for orthogonality at small residuals
    for (int c = 0; c < rank; ++c) r -= basis.col(c).dot(r) * basis.col(c);
    if (r.norm() > membership_tol) {
      basis.col(rank++) = r / r.norm();
      if (rank == n1) break;
    }
  }
  Eigen::MatrixXd out = basis.leftCols(rank);
  canonicalize_column_signs(out);
  return out;
}

namespace {

std::uint32_t closure_mask(const AtomicMeasure& nu, const Eigen::MatrixXd& basis,
                           double tol) {
  std::uint32_t mask = 0;
  for (int i = 0; i < nu.size(); ++i) {
    const Eigen::VectorXd& x = nu.atoms()[i].point.coords();
    if ((x - basis * (basis.transpose() * x)).norm() <= tol) {
      mask |= (1u << i);
    }
  }
  return mask;
}

SupportFlat make_flat(const AtomicMeasure& nu, std::uint32_t mask,
                      double tol) {
  SupportFlat f;
  f.member_mask = mask;
  for (int i = 0; i < nu.size(); ++i) {
    if (mask & (1u << i)) {
      f.atom_indices.push_back(i);
      f.mass += nu.atoms()[i].weight;
    }
  }
  f.basis = atom_span_basis(nu, f.atom_indices, tol);
  f.dim = static_cast<int>(f.basis.cols());
  return f;
}

}  // namespace

std::vector<SupportFlat> support_flats(const AtomicMeasure& nu,
                                       double membership_tol) {
  const int m = nu.size();
  if (m > kSupportFlatsGuard) {
    throw TooManyAtoms("support_flats: " + std::to_string(m) + " atoms exceed guard");
  }
  const int n1 = nu.dim();

  // Flats are closures of atom subsets and a closure is determined by its
  // membership set, so the BFS below keys on membership masks.
  std::map<std::uint32_t, SupportFlat> flats;
  std::deque<std::uint32_t> work;
  for (int i = 0; i < m; ++i) {
    auto basis = atom_span_basis(nu, {i}, membership_tol);
    std::uint32_t mask = closure_mask(nu, basis, membership_tol);
    if (!flats.count(mask)) {
      flats.emplace(mask, make_flat(nu, mask, membership_tol));
      work.push_back(mask);
    }
  }
  while (!work.empty()) {
    const std::uint32_t cur = work.front();
    work.pop_front();
    const SupportFlat& f = flats.at(cur);
    if (f.dim >= n1) continue;
    for (int j = 0; j < m; ++j) {
      if (cur & (1u << j)) continue;
      std::vector<int> idx = f.atom_indices;
      idx.push_back(j);
      auto basis = atom_span_basis(nu, idx, membership_tol);
      std::uint32_t mask = closure_mask(nu, basis, membership_tol);
      if (!flats.count(mask)) {
        flats.emplace(mask, make_flat(nu, mask, membership_tol));
        work.push_back(mask);
      }
    }
  }

  std::vector<SupportFlat> out;
  for (auto& [mask, f] : flats) {
    if (f.dim <= n1 - 1) out.push_back(std::move(f));
  }
  // Deterministic order: by dimension, then by membership mask.
  std::sort(out.begin(), out.end(), [](const SupportFlat& a, const SupportFlat& b) {
    if (a.dim != b.dim) return a.dim < b.dim;
    return a.member_mask < b.member_mask;
  });
  return out;
}

}  // namespace gitstab
