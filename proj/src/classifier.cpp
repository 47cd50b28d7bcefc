#include "gitstab/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "gitstab/rng.hpp"

namespace gitstab {

std::string to_string(StabilityKind k) {
  switch (k) {
    case StabilityKind::Stable: return "Stable";
    case StabilityKind::PolystableNotStable: return "PolystableNotStable";
    case StabilityKind::SemistableNotPolystable: return "SemistableNotPolystable";
    case StabilityKind::Unstable: return "Unstable";
  }
  return "?";
}

namespace {

// d P_{L-perp} - (n+1-d) P_L, normalized; contracts the flat.
Direction flat_contracting_direction(int n1, const SupportFlat& flat) {
  const Eigen::MatrixXd p = flat.basis * flat.basis.transpose();
  Eigen::MatrixXd m = flat.dim * Eigen::MatrixXd::Identity(n1, n1) - n1 * p;
  return Direction(TracelessSym(std::move(m)));
}

}  // namespace

Direction destabilizing_direction(const AtomicMeasure& nu,
                                  const SupportFlat& flat) {
  const int n1 = nu.dim();
  const double bound = static_cast<double>(flat.dim) / n1;
  if (!(flat.mass > bound)) {
    throw NotDestabilizing("flat mass " + std::to_string(flat.mass) +
                           " does not exceed dim/(n+1) = " + std::to_string(bound));
  }
  return flat_contracting_direction(n1, flat);
}

namespace {

Eigen::MatrixXd hcat(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.cols() == 0) return b;
  if (b.cols() == 0) return a;
  Eigen::MatrixXd m(a.rows(), a.cols() + b.cols());
  m.leftCols(a.cols()) = a;
  m.rightCols(b.cols()) = b;
  return m;
}

// ---------------------------------------------------------------------------
// Float path
// ---------------------------------------------------------------------------

struct FloatClassifier {
  const AtomicMeasure& nu;
  const ClassifyOptions& opt;
  std::vector<SupportFlat> flats;
  std::map<std::uint32_t, std::optional<double>> stable_inside_cache;

  FloatClassifier(const AtomicMeasure& m, const ClassifyOptions& o)
      : nu(m), opt(o) {
    flats = support_flats(m, o.membership_tol);
  }

  double slack(const SupportFlat& f) const {
    return static_cast<double>(f.dim) / nu.dim() - f.mass;
  }

  // Margin of the renormalized restriction to a flat if it is Stable there,
  // nullopt otherwise. dim-1 flats are stable with a vacuous margin.
  std::optional<double> stable_inside(const SupportFlat& f) {
    auto it = stable_inside_cache.find(f.member_mask);
    if (it != stable_inside_cache.end()) return it->second;
    std::optional<double> res;
    if (f.dim == 1) {
      res = 1.0;
    } else {
      std::vector<Atom> sub;
      for (int idx : f.atom_indices) {
        const auto& a = nu.atoms()[idx];
        sub.push_back({ProjPoint(f.basis.transpose() * a.point.coords()),
                       a.weight / f.mass});
      }
      AtomicMeasure restricted(f.dim, std::move(sub), /*renormalize=*/true);
      ClassifyOptions sub_opt = opt;
      sub_opt.prefer_exact = false;
      StabilityVerdict v = classify(restricted, sub_opt);
      if (v.kind == StabilityKind::Stable) res = v.margin;
    }
    stable_inside_cache.emplace(f.member_mask, res);
    return res;
  }

  bool independent_with(const Eigen::MatrixXd& acc, const SupportFlat& f) const {
    if (acc.cols() == 0) return true;
    const Eigen::MatrixXd joint = hcat(acc, f.basis);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(joint);
    qr.setThreshold(1e-8);
    return qr.rank() == joint.cols();
  }

  bool search_splitting(const std::vector<int>& candidates, size_t from,
                        Eigen::MatrixXd acc, std::uint32_t covered,
                        std::vector<int>& chosen) {
    const int n1 = nu.dim();
    if (acc.cols() == n1) {
      return covered == ((1u << nu.size()) - 1u);
    }
    for (size_t i = from; i < candidates.size(); ++i) {
      const SupportFlat& f = flats[candidates[i]];
      if (f.dim > n1 - acc.cols()) continue;
      if (covered & f.member_mask) continue;  // pieces meet only at 0
      if (!independent_with(acc, f)) continue;
      chosen.push_back(candidates[i]);
      if (search_splitting(candidates, i + 1, hcat(acc, f.basis),
                           covered | f.member_mask, chosen)) {
        return true;
      }
      chosen.pop_back();
    }
    return false;
  }

  StabilityVerdict run() {
    const int n1 = nu.dim();
    StabilityVerdict v;

    const SupportFlat* worst = nullptr;
    std::vector<int> equalities;
    double min_slack = 1.0;
    for (size_t i = 0; i < flats.size(); ++i) {
      const double s = slack(flats[i]);
      min_slack = std::min(min_slack, s);
      if (s < -opt.equality_tol) {
        if (worst == nullptr || flats[i].mass - static_cast<double>(flats[i].dim) / n1 >
                                    worst->mass - static_cast<double>(worst->dim) / n1) {
          worst = &flats[i];
        }
      } else if (s <= opt.equality_tol) {
        equalities.push_back(static_cast<int>(i));
      }
    }

    if (worst != nullptr) {
      v.kind = StabilityKind::Unstable;
      v.certified = true;
      v.witness_flat = *worst;
      v.witness_direction = destabilizing_direction(nu, *worst).xi();
      return v;
    }
    if (equalities.empty()) {
      v.kind = StabilityKind::Stable;
      v.certified = true;
      v.margin = min_slack;
      return v;
    }

    // Semistable with at least one tight flat: look for a splitting made of
    // tight flats whose restrictions are stable.
    std::vector<int> candidates;
    for (int idx : equalities) {
      if (stable_inside(flats[idx]).has_value()) candidates.push_back(idx);
    }
    std::vector<int> chosen;
    if (search_splitting(candidates, 0, Eigen::MatrixXd(n1, 0), 0u, chosen)) {
      v.kind = StabilityKind::PolystableNotStable;
      for (int idx : chosen) {
        v.splitting.push_back({flats[idx], *stable_inside(flats[idx])});
      }
    } else {
      v.kind = StabilityKind::SemistableNotPolystable;
      v.witness_flat = flats[equalities.front()];
    }
    v.needs_exact = true;
    v.certified = false;
    return v;
  }
};

// ---------------------------------------------------------------------------
// Exact path
// ---------------------------------------------------------------------------

struct ExactFlat {
  std::uint32_t mask = 0;
  int dim = 0;
  Rat mass;
  std::vector<int> atom_indices;
  RatMat basis_rows;  // independent member atoms spanning the flat
};

struct ExactVerdict {
  StabilityKind kind = StabilityKind::Stable;
  Rat margin;
  std::uint32_t witness_mask = 0;
  std::vector<std::uint32_t> splitting_masks;
  std::vector<Rat> splitting_margins;
};

struct ExactClassifier {
  const ExactMeasureData& data;

  explicit ExactClassifier(const ExactMeasureData& d) : data(d) {}

  ExactFlat make_flat(std::uint32_t mask) const {
    ExactFlat f;
    f.mask = mask;
    for (size_t i = 0; i < data.atoms.size(); ++i) {
      if (mask & (1u << i)) {
        f.atom_indices.push_back(static_cast<int>(i));
        f.mass += data.atoms[i].weight;
        RatMat probe = f.basis_rows;
        probe.push_back(data.atoms[i].coords);
        if (rat_rank(probe) > f.dim) {
          f.basis_rows.push_back(data.atoms[i].coords);
          ++f.dim;
        }
      }
    }
    return f;
  }

  std::uint32_t closure(const RatMat& span_rows) const {
    std::uint32_t mask = 0;
    for (size_t i = 0; i < data.atoms.size(); ++i) {
      if (rat_in_span(span_rows, data.atoms[i].coords)) mask |= (1u << i);
    }
    return mask;
  }

  std::vector<ExactFlat> enumerate_flats() const {
    const int m = static_cast<int>(data.atoms.size());
    std::map<std::uint32_t, ExactFlat> flats;
    std::deque<std::uint32_t> work;
    auto add = [&](std::uint32_t mask) {
      if (!flats.count(mask)) {
        flats.emplace(mask, make_flat(mask));
        work.push_back(mask);
      }
    };
    for (int i = 0; i < m; ++i) add(closure({data.atoms[i].coords}));
    while (!work.empty()) {
      std::uint32_t cur = work.front();
      work.pop_front();
      const ExactFlat f = flats.at(cur);
      if (f.dim >= data.n_plus_1) continue;
      for (int j = 0; j < m; ++j) {
        if (cur & (1u << j)) continue;
        RatMat rows = f.basis_rows;
        rows.push_back(data.atoms[j].coords);
        add(closure(rows));
      }
    }
    std::vector<ExactFlat> out;
    for (auto& [mask, f] : flats) {
      if (f.dim <= data.n_plus_1 - 1) out.push_back(std::move(f));
    }
    std::sort(out.begin(), out.end(), [](const ExactFlat& a, const ExactFlat& b) {
      if (a.dim != b.dim) return a.dim < b.dim;
      return a.mask < b.mask;
    });
    return out;
  }

  std::optional<Rat> stable_inside(const ExactFlat& f) const {
    if (f.dim == 1) return Rat(1);
    ExactMeasureData sub;
    sub.n_plus_1 = f.dim;
    for (int idx : f.atom_indices) {
      sub.atoms.push_back({rat_solve_coords(f.basis_rows, data.atoms[idx].coords),
                           data.atoms[idx].weight / f.mass});
    }
    ExactVerdict v = ExactClassifier(sub).run();
    if (v.kind == StabilityKind::Stable) return v.margin;
    return std::nullopt;
  }

  bool search_splitting(const std::vector<ExactFlat>& flats,
                        const std::vector<int>& candidates, size_t from,
                        RatMat acc, int acc_dim, std::uint32_t covered,
                        std::vector<int>& chosen) const {
    if (acc_dim == data.n_plus_1) {
      const std::uint32_t all =
          data.atoms.size() == 32 ? ~0u : (1u << data.atoms.size()) - 1u;
      return covered == all;
    }
    for (size_t i = from; i < candidates.size(); ++i) {
      const ExactFlat& f = flats[candidates[i]];
      if (f.dim > data.n_plus_1 - acc_dim) continue;
      if (covered & f.mask) continue;
      RatMat joint = acc;
      for (const auto& r : f.basis_rows) joint.push_back(r);
      if (rat_rank(joint) != acc_dim + f.dim) continue;
      chosen.push_back(candidates[i]);
      if (search_splitting(flats, candidates, i + 1, std::move(joint),
                           acc_dim + f.dim, covered | f.mask, chosen)) {
        return true;
      }
      chosen.pop_back();
    }
    return false;
  }

  ExactVerdict run() const {
    ExactVerdict v;
    const std::vector<ExactFlat> flats = enumerate_flats();
    const Rat n1(data.n_plus_1);

    const ExactFlat* worst = nullptr;
    Rat worst_excess;
    std::vector<int> equalities;
    bool have_margin = false;
    for (size_t i = 0; i < flats.size(); ++i) {
      const Rat bound = Rat(flats[i].dim) / n1;
      const Rat s = bound - flats[i].mass;
      if (!have_margin || s < v.margin) {
        v.margin = s;
        have_margin = true;
      }
      if (s < 0) {
        if (worst == nullptr || -s > worst_excess) {
          worst = &flats[i];
          worst_excess = -s;
        }
      } else if (s == 0) {
        equalities.push_back(static_cast<int>(i));
      }
    }
    if (worst != nullptr) {
      v.kind = StabilityKind::Unstable;
      v.witness_mask = worst->mask;
      return v;
    }
    if (equalities.empty()) {
      v.kind = StabilityKind::Stable;
      return v;
    }
    std::vector<int> candidates;
    std::vector<Rat> margins;
    for (int idx : equalities) {
      if (auto m = stable_inside(flats[idx])) {
        candidates.push_back(idx);
        margins.push_back(*m);
      }
    }
    std::vector<int> chosen;
    if (search_splitting(flats, candidates, 0, {}, 0, 0u, chosen)) {
      v.kind = StabilityKind::PolystableNotStable;
      for (int idx : chosen) {
        v.splitting_masks.push_back(flats[idx].mask);
        const auto it =
            std::find(candidates.begin(), candidates.end(), idx);
        v.splitting_margins.push_back(margins[it - candidates.begin()]);
      }
    } else {
      v.kind = StabilityKind::SemistableNotPolystable;
      v.witness_mask = flats[equalities.front()].mask;
    }
    return v;
  }
};

SupportFlat flat_from_mask(const AtomicMeasure& nu, std::uint32_t mask,
                           double membership_tol) {
  SupportFlat f;
  f.member_mask = mask;
  for (int i = 0; i < nu.size(); ++i) {
    if (mask & (1u << i)) {
      f.atom_indices.push_back(i);
      f.mass += nu.atoms()[i].weight;
    }
  }
  f.basis = atom_span_basis(nu, f.atom_indices, membership_tol);
  f.dim = static_cast<int>(f.basis.cols());
  return f;
}

}  // namespace

StabilityVerdict classify(const AtomicMeasure& nu, const ClassifyOptions& opt) {
  if (nu.size() > kSupportFlatsGuard) {
    throw TooManyAtoms("classify: atom count exceeds guard; use classify_sampled");
  }
  if (opt.prefer_exact && nu.has_exact()) {
    const ExactVerdict ev = ExactClassifier(nu.exact()).run();
    StabilityVerdict v;
    v.kind = ev.kind;
    v.exact = true;
    v.certified = true;
    v.margin = to_double(ev.margin);
    if (ev.witness_mask != 0) {
      v.witness_flat = flat_from_mask(nu, ev.witness_mask, opt.membership_tol);
    }
    if (v.kind == StabilityKind::Unstable) {
      // bypass the float mass gate: the exact comparison already certified
      // the violation, which may sit below float resolution
      v.witness_direction =
          flat_contracting_direction(nu.dim(), *v.witness_flat).xi();
    }
    for (size_t i = 0; i < ev.splitting_masks.size(); ++i) {
      v.splitting.push_back(
          {flat_from_mask(nu, ev.splitting_masks[i], opt.membership_tol),
           to_double(ev.splitting_margins[i])});
    }
    return v;
  }
  return FloatClassifier(nu, opt).run();
}

std::vector<TracelessSym> flat_derived_directions(
    const AtomicMeasure& nu, const std::vector<SupportFlat>& flats) {
  const int n1 = nu.dim();

  // All chains in the inclusion poset of flats (membership masks order the
  // closures exactly as the spans do), under a hard budget: at desk scale
  // the enumeration is complete, beyond it the family is a deterministic
  // prefix.
  constexpr size_t kChainBudget = 20000;
  std::vector<std::vector<int>> chains;
  std::vector<int> cur;
  auto extend = [&](auto&& self, int last) -> bool {
    if (chains.size() >= kChainBudget) return false;
    chains.push_back(cur);
    for (size_t j = 0; j < flats.size(); ++j) {
      const std::uint32_t a = flats[last].member_mask;
      const std::uint32_t b = flats[j].member_mask;
      if (a != b && (a & b) == a && flats[j].dim > flats[last].dim) {
        cur.push_back(static_cast<int>(j));
        const bool more = self(self, static_cast<int>(j));
        cur.pop_back();
        if (!more) return false;
      }
    }
    return true;
  };
  for (size_t i = 0; i < flats.size(); ++i) {
    cur = {static_cast<int>(i)};
    if (!extend(extend, static_cast<int>(i))) break;
  }

  // Sign patterns over the chain blocks multiply fast in high ambient
  // dimension (2^blocks per chain); the budget keeps the family complete at
  // desk scale and a deterministic prefix beyond it.
  constexpr size_t kDirectionBudget = 50000;
  std::vector<TracelessSym> dirs;
  for (const auto& chain : chains) {
    if (dirs.size() >= kDirectionBudget) break;
    // Orthogonal increment blocks of the chain, plus the complement.
    std::vector<Eigen::MatrixXd> blocks;
    Eigen::MatrixXd acc(n1, 0);
    auto push_block = [&](const Eigen::MatrixXd& cols) {
      Eigen::MatrixXd blk(n1, cols.cols());
      int r = 0;
      for (int c = 0; c < cols.cols(); ++c) {
        Eigen::VectorXd v = cols.col(c);
        for (int q = 0; q < acc.cols(); ++q) v -= acc.col(q).dot(v) * acc.col(q);
        for (int q = 0; q < acc.cols(); ++q) v -= acc.col(q).dot(v) * acc.col(q);
        if (v.norm() > 1e-8) {
          v.normalize();
          acc.conservativeResize(Eigen::NoChange, acc.cols() + 1);
          acc.col(acc.cols() - 1) = v;
          blk.col(r++) = v;
        }
      }
      if (r > 0) blocks.push_back(blk.leftCols(r));
    };
    for (int idx : chain) push_block(flats[idx].basis);
    push_block(Eigen::MatrixXd::Identity(n1, n1));

    const int nb = static_cast<int>(blocks.size());
    if (nb < 2) continue;
    for (unsigned pat = 1; pat + 1 < (1u << nb); ++pat) {
      if (dirs.size() >= kDirectionBudget) break;
      Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n1, n1);
      for (int b = 0; b < nb; ++b) {
        const double s = (pat & (1u << b)) ? 1.0 : -1.0;
        m += s * blocks[b] * blocks[b].transpose();
      }
      TracelessSym xi(std::move(m));
      if (xi.norm() > 1e-9) dirs.push_back(xi.scaled(1.0 / xi.norm()));
    }
  }
  return dirs;
}

CrossCheckReport numerical_cross_check(const AtomicMeasure& nu,
                                       const StabilityVerdict& verdict,
                                       int n_samples, std::uint64_t seed) {
  CrossCheckReport rep;
  const int n1 = nu.dim();
  Rng rng(seed);

  double min_random = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n_samples; ++i) {
    min_random = std::min(min_random, maximal_weight(nu, rng.random_direction(n1)));
  }
  rep.min_random = min_random;

  std::vector<TracelessSym> dirs;
  if (nu.size() <= kSupportFlatsGuard) {
    dirs = flat_derived_directions(nu, support_flats(nu));
  } else if (verdict.sampled) {
    std::vector<SupportFlat> proposed;
    if (verdict.witness_flat) proposed.push_back(*verdict.witness_flat);
    for (const auto& p : verdict.splitting) proposed.push_back(p.flat);
    dirs = flat_derived_directions(nu, proposed);
  }
  if (dirs.size() > 20000) {
    // deterministic stride subsample past desk scale
    std::vector<TracelessSym> kept;
    const size_t stride = dirs.size() / 20000 + 1;
    for (size_t i = 0; i < dirs.size(); i += stride) kept.push_back(dirs[i]);
    dirs = std::move(kept);
  }
  double min_flat = std::numeric_limits<double>::infinity();
  for (const auto& d : dirs) min_flat = std::min(min_flat, maximal_weight(nu, d));
  rep.min_flat_derived = dirs.empty() ? min_random : min_flat;
  rep.flat_direction_count = static_cast<int>(dirs.size());

  if (verdict.witness_direction) {
    rep.witness_lambda = maximal_weight(nu, *verdict.witness_direction);
  }

  // Abelian (Hilbert-Mumford) restriction: diagonal directions in frames
  // containing the witness/minimizer, plus random frames.
  std::vector<Eigen::MatrixXd> frames;
  if (verdict.witness_direction) {
    frames.push_back(
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(verdict.witness_direction->mat())
            .eigenvectors());
  } else if (!dirs.empty()) {
    frames.push_back(
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(dirs.front().mat())
            .eigenvectors());
  }
  for (int i = 0; i < 3; ++i) frames.push_back(rng.random_orthogonal(n1));

  double min_abelian = std::numeric_limits<double>::infinity();
  const int per_frame = std::max(32, n_samples / 4);
  for (const auto& fr : frames) {
    for (int i = 0; i < per_frame; ++i) {
      Eigen::VectorXd d = rng.gaussian_vector(n1);
      d.array() -= d.mean();
      if (d.norm() <= 1e-9) continue;
      d.normalize();
      TracelessSym xi(fr * d.asDiagonal() * fr.transpose());
      min_abelian = std::min(min_abelian, maximal_weight(nu, xi));
    }
  }
  if (verdict.witness_direction) {
    min_abelian = std::min(min_abelian, *rep.witness_lambda);
  }
  rep.min_abelian = min_abelian;

  std::ostringstream oss;
  bool ok = true;
  const double overall =
      std::min(rep.min_random, std::min(rep.min_flat_derived, rep.min_abelian));
  switch (verdict.kind) {
    case StabilityKind::Stable:
      if (!(overall > 0.0)) {
        ok = false;
        oss << "stable verdict but sampled weight " << overall << " <= 0;";
      }
      break;
    case StabilityKind::PolystableNotStable:
    case StabilityKind::SemistableNotPolystable:
      if (overall < -1e-9) {
        ok = false;
        oss << "semistable verdict but sampled weight " << overall << " < 0;";
      }
      if (rep.min_flat_derived > 1e-9) {
        ok = false;
        oss << "no flat-derived direction achieves weight 0;";
      }
      break;
    case StabilityKind::Unstable:
      if (!(rep.witness_lambda && *rep.witness_lambda < 0.0)) {
        ok = false;
        oss << "unstable verdict but witness weight not negative;";
      }
      break;
  }
  rep.consistent = ok;
  rep.detail = oss.str();
  return rep;
}

StabilityVerdict classify_sampled(const AtomicMeasure& nu, int n_samples,
                                  std::uint64_t seed,
                                  const ClassifyOptions& opt) {
  const int n1 = nu.dim();
  const int m = nu.size();
  Rng rng(seed);

  // Dedupe proposed flats by their full membership list; masks overflow
  // beyond 32 atoms and stay zero there.
  std::map<std::vector<int>, SupportFlat> seen;
  auto propose = [&](const std::vector<int>& idx) {
    Eigen::MatrixXd basis = atom_span_basis(nu, idx, opt.membership_tol);
    if (basis.cols() == 0 || basis.cols() >= n1) return;
    SupportFlat f;
    for (int i = 0; i < m; ++i) {
      const Eigen::VectorXd& x = nu.atoms()[i].point.coords();
      if ((x - basis * (basis.transpose() * x)).norm() <= opt.membership_tol) {
        f.atom_indices.push_back(i);
        f.mass += nu.atoms()[i].weight;
        if (i < 32) f.member_mask |= (1u << i);
      }
    }
    if (seen.count(f.atom_indices)) return;
    f.basis = atom_span_basis(nu, f.atom_indices, opt.membership_tol);
    f.dim = static_cast<int>(f.basis.cols());
    if (f.dim >= n1) return;
    std::vector<int> key = f.atom_indices;
    seen.emplace(std::move(key), std::move(f));
  };

  for (int i = 0; i < m; ++i) propose({i});
  {
    // Span deficiency shows up as the everything-flat being proper.
    std::vector<int> all(m);
    for (int i = 0; i < m; ++i) all[i] = i;
    propose(all);
  }
  for (int s = 0; s < n_samples; ++s) {
    const int size = rng.uniform_int(2, std::max(2, std::min(m, n1 - 1)));
    std::set<int> pick;
    while (static_cast<int>(pick.size()) < size) pick.insert(rng.uniform_int(0, m - 1));
    propose(std::vector<int>(pick.begin(), pick.end()));
  }

  StabilityVerdict v;
  v.sampled = true;
  v.certified = false;

  const SupportFlat* worst = nullptr;
  std::vector<const SupportFlat*> tight;
  double min_slack = 1.0;
  for (const auto& [key, f] : seen) {
    const double s = static_cast<double>(f.dim) / n1 - f.mass;
    min_slack = std::min(min_slack, s);
    if (s < -opt.equality_tol) {
      if (worst == nullptr ||
          f.mass - static_cast<double>(f.dim) / n1 >
              worst->mass - static_cast<double>(worst->dim) / n1) {
        worst = &f;
      }
    } else if (s <= opt.equality_tol) {
      tight.push_back(&f);
    }
  }
  if (worst != nullptr) {
    v.kind = StabilityKind::Unstable;
    v.witness_flat = *worst;
    v.witness_direction = destabilizing_direction(nu, *worst).xi();
    return v;
  }
  v.margin = min_slack;
  if (tight.empty()) {
    v.kind = StabilityKind::Stable;
    return v;
  }

  // Splitting search over the sampled tight flats, with the same
  // stable-inside filter as the exhaustive path. Coverage is tracked on an
  // atom flag vector so large supports are handled.
  std::vector<SupportFlat> tight_flats;
  for (const auto* f : tight) tight_flats.push_back(*f);
  std::sort(tight_flats.begin(), tight_flats.end(),
            [](const SupportFlat& a, const SupportFlat& b) {
              if (a.dim != b.dim) return a.dim < b.dim;
              return a.atom_indices < b.atom_indices;
            });
  auto stable_inside = [&](const SupportFlat& f) -> std::optional<double> {
    if (f.dim == 1) return 1.0;
    std::vector<Atom> sub;
    for (int idx : f.atom_indices) {
      const auto& a = nu.atoms()[idx];
      sub.push_back({ProjPoint(f.basis.transpose() * a.point.coords()),
                     a.weight / f.mass});
    }
    AtomicMeasure restricted(f.dim, std::move(sub), true);
    if (restricted.size() > kSupportFlatsGuard) return std::nullopt;
    ClassifyOptions sub_opt = opt;
    sub_opt.prefer_exact = false;
    StabilityVerdict sv = classify(restricted, sub_opt);
    if (sv.kind == StabilityKind::Stable) return sv.margin;
    return std::nullopt;
  };

  std::vector<SplittingPiece> pieces;
  std::vector<char> covered(m, 0);
  Eigen::MatrixXd acc(n1, 0);
  std::function<bool(size_t)> dfs = [&](size_t from) -> bool {
    if (acc.cols() == n1) {
      return std::all_of(covered.begin(), covered.end(),
                         [](char c) { return c != 0; });
    }
    for (size_t i = from; i < tight_flats.size(); ++i) {
      const SupportFlat& f = tight_flats[i];
      if (f.dim > n1 - acc.cols()) continue;
      if (std::any_of(f.atom_indices.begin(), f.atom_indices.end(),
                      [&](int idx) { return covered[idx] != 0; })) {
        continue;
      }
      const Eigen::MatrixXd joint = hcat(acc, f.basis);
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(joint);
      qr.setThreshold(1e-8);
      if (qr.rank() != joint.cols()) continue;
      const auto margin = stable_inside(f);
      if (!margin) continue;
      Eigen::MatrixXd saved = std::move(acc);
      acc = joint;
      for (int idx : f.atom_indices) covered[idx] = 1;
      pieces.push_back({f, *margin});
      if (dfs(i + 1)) return true;
      pieces.pop_back();
      for (int idx : f.atom_indices) covered[idx] = 0;
      acc = std::move(saved);
    }
    return false;
  };
  if (dfs(0)) {
    v.kind = StabilityKind::PolystableNotStable;
    v.splitting = std::move(pieces);
  } else {
    v.kind = StabilityKind::SemistableNotPolystable;
    v.witness_flat = *tight.front();
  }
  v.needs_exact = true;
  return v;
}

std::string verify_verdict(const AtomicMeasure& nu,
                           const StabilityVerdict& verdict) {
  const int n1 = nu.dim();
  std::ostringstream oss;
  switch (verdict.kind) {
    case StabilityKind::Stable:
      if (!(verdict.margin > 0.0)) oss << "stable margin not positive; ";
      break;
    case StabilityKind::Unstable: {
      if (!verdict.witness_flat || !verdict.witness_direction) {
        oss << "missing unstable witness; ";
        break;
      }
      const double lam = maximal_weight(nu, *verdict.witness_direction);
      if (!(lam < 0.0)) oss << "witness direction weight " << lam << " >= 0; ";
      const double bound = static_cast<double>(verdict.witness_flat->dim) / n1;
      if (!(verdict.witness_flat->mass > bound)) {
        oss << "witness flat does not violate its bound; ";
      }
      break;
    }
    case StabilityKind::PolystableNotStable: {
      int dim_total = 0;
      Eigen::MatrixXd acc(n1, 0);
      std::vector<char> covered(nu.size(), 0);
      for (const auto& p : verdict.splitting) {
        dim_total += p.flat.dim;
        const double bound = static_cast<double>(p.flat.dim) / n1;
        if (std::abs(p.flat.mass - bound) > 1e-9) {
          oss << "piece mass " << p.flat.mass << " != dim/(n+1); ";
        }
        if (!(p.inner_margin > 0.0)) oss << "piece restriction not stable; ";
        Eigen::MatrixXd joint(n1, acc.cols() + p.flat.basis.cols());
        joint.leftCols(acc.cols()) = acc;
        joint.rightCols(p.flat.basis.cols()) = p.flat.basis;
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(joint);
        qr.setThreshold(1e-8);
        if (qr.rank() != joint.cols()) oss << "pieces not independent; ";
        acc = joint;
        for (int idx : p.flat.atom_indices) covered[idx] = 1;
      }
      if (dim_total != n1) oss << "piece dimensions sum to " << dim_total << "; ";
      if (!std::all_of(covered.begin(), covered.end(),
                       [](char c) { return c != 0; })) {
        oss << "atoms not covered by splitting; ";
      }
      break;
    }
    case StabilityKind::SemistableNotPolystable: {
      if (!verdict.witness_flat) {
        oss << "missing equality flat; ";
        break;
      }
      const double bound = static_cast<double>(verdict.witness_flat->dim) / n1;
      if (std::abs(verdict.witness_flat->mass - bound) > 1e-9) {
        oss << "equality flat mass not at its bound; ";
      }
      break;
    }
  }
  return oss.str();
}

}  // namespace gitstab
