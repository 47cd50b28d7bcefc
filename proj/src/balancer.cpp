#include "gitstab/balancer.hpp"

#include <algorithm>
#include <cmath>

namespace gitstab {

std::string to_string(BalanceStatus s) {
  switch (s) {
    case BalanceStatus::Converged: return "Converged";
    case BalanceStatus::Diverged: return "Diverged";
    case BalanceStatus::MaxIterations: return "MaxIterations";
  }
  return "?";
}

namespace {

// Psi(nu_t, exp(-eta F)) evaluated as sum w log1p(<y, (exp(-2 eta F)-I) y>)/4.
// The expm1 form keeps the decrement accurate in absolute terms even when it
// is far below the roundoff floor of Psi itself, which is what the Armijo
// comparison needs near convergence.
double descent_decrement(const AtomicMeasure& nu_t,
                         const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>& es,
                         double eta) {
  const Eigen::VectorXd em = (-2.0 * eta * es.eigenvalues().array()).unaryExpr(
      [](double v) { return std::expm1(v); });
  double dec = 0.0;
  for (const auto& a : nu_t.atoms()) {
    const Eigen::VectorXd comp = es.eigenvectors().transpose() * a.point.coords();
    const double u = (em.array() * comp.array().square()).sum();
    dec += a.weight * std::log1p(u);
  }
  return 0.25 * dec;
}

}  // namespace

BalanceResult balance(const AtomicMeasure& nu, const BalanceOptions& opt) {
  if (!(opt.tol > 0.0) || opt.max_iter < 1) {
    throw Error("balance: tol must be > 0 and max_iter >= 1");
  }
  const int n1 = nu.dim();
  constexpr double kArmijo = 1e-4;

  // The transform is kept as a raw matrix during the iteration. Its scale
  // and determinant drift are projectively harmless and are squashed on
  // exit; near geodesic escape g^T g is too ill-conditioned for a checked
  // group element anyway.
  Eigen::MatrixXd gm = Eigen::MatrixXd::Identity(n1, n1);
  Eigen::MatrixXd gm_inv = gm;  // maintained as a product, never by inversion

  BalanceResult res{SpecialLinear::identity(n1), 0.0, 0,
                    BalanceStatus::MaxIterations, {}, std::nullopt};
  AtomicMeasure current = nu;
  double psi = 0.0;
  double last_step = 0.0;
  double eta = 1.0;

  auto apply = [&](const Eigen::MatrixXd& m) -> AtomicMeasure {
    std::vector<Atom> atoms;
    atoms.reserve(nu.size());
    for (const auto& a : nu.atoms()) {
      Eigen::VectorXd y = m * a.point.coords();
      if (y.norm() <= 1e-12) {
        throw SingularInput("balance: atom collapsed under the transform");
      }
      atoms.push_back({ProjPoint(std::move(y)), a.weight});
    }
    return AtomicMeasure(n1, std::move(atoms));
  };
  auto finish = [&](BalanceStatus status) {
    res.status = status;
    // Squash scale drift through the singular values; the raw determinant
    // of an escaped transform is not numerically evaluable.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gm.transpose() * gm);
    double mean_log = 0.0;
    for (int i = 0; i < n1; ++i) {
      mean_log += 0.5 * std::log(std::max(es.eigenvalues()(i), 1e-300));
    }
    res.g = SpecialLinear::trusted(gm * std::exp(-mean_log / n1));
    return res;
  };

  for (int iter = 0; iter <= opt.max_iter; ++iter) {
    const TracelessSym grad = grad_F(current);
    const double r = grad.norm();
    if (opt.record_trace) res.trace.push_back({psi, r, last_step});
    res.residual = r;
    res.iterations = iter;

    if (r <= opt.tol) return finish(BalanceStatus::Converged);

    // Polar norm of the accumulated transform. While g^T g is decently
    // conditioned the norm and direction are exact; beyond that the largest
    // singular values of g and of g^{-1} still give a valid lower bound.
    double polar_norm = 0.0;
    {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gm.transpose() * gm);
      const double max_eig = es.eigenvalues().maxCoeff();
      const double min_eig = es.eigenvalues().minCoeff();
      if (min_eig > 1e-13 * max_eig) {
        Eigen::VectorXd half_log = 0.5 * es.eigenvalues().array().log();
        TracelessSym xi(es.eigenvectors() * half_log.asDiagonal() *
                        es.eigenvectors().transpose());
        polar_norm = xi.norm();
        if (polar_norm > 1e-9) {
          res.escape_direction = xi.scaled(1.0 / polar_norm);
        }
      } else {
        const double log_sigma_g = 0.5 * std::log(max_eig);
        const double log_sigma_inv =
            std::log(std::max(gm_inv.norm() / std::sqrt(double(n1)), 1.0));
        polar_norm = std::max(log_sigma_g, log_sigma_inv);
      }
    }
    if (polar_norm > opt.divergence_norm && r > opt.residual_floor) {
      return finish(BalanceStatus::Diverged);
    }
    if (iter == opt.max_iter) break;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(grad.mat());
    eta = std::min(1.0, 2.0 * eta);
    double dec = 0.0;
    // The decrement satisfies dec(eta) <= -eta r^2 / 2 for eta <= 1, so the
    // Armijo condition holds at the first probe except for roundoff.
    while (true) {
      dec = descent_decrement(current, es, eta);
      if (dec <= -kArmijo * eta * r * r) break;
      eta *= 0.5;
      if (eta < 1e-14) break;
    }
    gm = exp_sym(grad.scaled(-eta)).mat() * gm;
    gm_inv = gm_inv * exp_sym(grad.scaled(eta)).mat();
    try {
      current = apply(gm);
    } catch (const SingularInput&) {
      // atoms underflow only along an escaping geodesic
      if (r > opt.residual_floor) return finish(BalanceStatus::Diverged);
      return finish(BalanceStatus::MaxIterations);
    }
    psi += dec;
    last_step = eta;
  }
  return finish(BalanceStatus::MaxIterations);
}

double isotropy_check(const AtomicMeasure& nu, const SpecialLinear& g) {
  const int n1 = nu.dim();
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n1, n1);
  for (const auto& a : nu.atoms()) {
    Eigen::VectorXd y = g.mat() * a.point.coords();
    const double sq = y.squaredNorm();
    if (sq <= 1e-24) throw SingularInput("isotropy_check: atom mapped to zero");
    s += a.weight / sq * y * y.transpose();
  }
  s -= Eigen::MatrixXd::Identity(n1, n1) / n1;
  return s.norm();
}

PropernessReport linear_properness_probe(const AtomicMeasure& nu,
                                         const std::vector<Direction>& directions,
                                         double t_max) {
  PropernessReport rep;
  if (directions.empty() || !(t_max > 0.0)) return rep;
  constexpr int kSamples = 33;
  constexpr double kSlopeTol = 1e-9;

  double min_slope = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> values(directions.size());
  for (size_t d = 0; d < directions.size(); ++d) {
    PropernessSample s;
    s.lambda = maximal_weight(nu, directions[d].xi());
    for (int i = 0; i < kSamples; ++i) {
      const double t = t_max * i / (kSamples - 1);
      values[d].push_back(kn_geodesic_value(nu, directions[d].xi(), t));
    }
    s.tail_slope =
        (values[d].back() - values[d][kSamples / 2]) / (t_max - t_max / 2);
    s.holds = s.tail_slope > kSlopeTol;
    min_slope = std::min(min_slope, s.tail_slope);
    rep.per_direction.push_back(s);
  }
  rep.holds = min_slope > kSlopeTol;
  if (rep.holds) {
    rep.c1 = 1.0 / min_slope;
    double c2 = 0.0;
    for (size_t d = 0; d < directions.size(); ++d) {
      for (int i = 0; i < kSamples; ++i) {
        const double t = t_max * i / (kSamples - 1);
        c2 = std::max(c2, t - rep.c1 * values[d][i]);
      }
    }
    rep.c2 = c2;
  }
  return rep;
}

SpecialLinear balance_splitting(const AtomicMeasure& nu,
                                const std::vector<SupportFlat>& pieces,
                                const BalanceOptions& opt) {
  const int n1 = nu.dim();
  int total = 0;
  Eigen::MatrixXd b(n1, n1);
  for (const auto& p : pieces) {
    if (total + p.dim > n1) throw Error("balance_splitting: dims exceed n+1");
    b.middleCols(total, p.dim) = p.basis;
    total += p.dim;
  }
  if (total != n1) throw Error("balance_splitting: dims do not sum to n+1");

  // b maps coordinate blocks onto the pieces; its inverse puts the pieces
  // onto mutually orthogonal coordinate blocks. An orientation flip must
  // happen on a piece basis vector (harmless projectively) and not on a
  // column of the inverse, which would reflect the input coordinates and
  // break the block alignment.
  if (b.determinant() < 0.0) b.col(0) *= -1.0;
  const SpecialLinear g0 = SpecialLinear::normalized(b.inverse());

  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n1, n1);
  int offset = 0;
  for (const auto& p : pieces) {
    const int d = p.dim;
    if (d >= 2) {
      std::vector<Atom> sub;
      for (int idx : p.atom_indices) {
        const auto& a = nu.atoms()[idx];
        Eigen::VectorXd y = g0.mat() * a.point.coords();
        sub.push_back({ProjPoint(y.segment(offset, d)), a.weight / p.mass});
      }
      AtomicMeasure piece(d, std::move(sub), /*renormalize=*/true);
      BalanceOptions piece_opt = opt;
      piece_opt.record_trace = false;
      const BalanceResult br = balance(piece, piece_opt);
      if (br.status != BalanceStatus::Converged) {
        throw Error("balance_splitting: piece failed to balance (" +
                    to_string(br.status) + ")");
      }
      h.block(offset, offset, d, d) = br.g.mat();
    }
    offset += d;
  }
  return SpecialLinear(h) * g0;
}

}  // namespace gitstab
