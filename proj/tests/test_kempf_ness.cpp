#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "gitstab/kempf_ness.hpp"
#include "gitstab/rng.hpp"
#include "support/fixtures.hpp"

using namespace gitstab;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (double c : v) x(i++) = c;
  return x;
}

Eigen::MatrixXd diag(std::initializer_list<double> v) {
  return Eigen::VectorXd(vec(v)).asDiagonal();
}

AtomicMeasure half_half_rp1() {
  return AtomicMeasure(2, {{ProjPoint(vec({1, 0})), 0.5},
                           {ProjPoint(vec({0, 1})), 0.5}});
}

AtomicMeasure uniform_basis(int n1) {
  std::vector<Atom> atoms;
  for (int i = 0; i < n1; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n1);
    e(i) = 1.0;
    atoms.push_back({ProjPoint(std::move(e)), 1.0 / n1});
  }
  return AtomicMeasure(n1, std::move(atoms));
}

std::vector<double> default_grid() {
  std::vector<double> g;
  for (int i = 0; i <= 20; ++i) g.push_back(-2.0 + 0.2 * i);
  return g;
}

}  // namespace

TEST_CASE("moment map values") {
  const TracelessSym mu = moment_mu(ProjPoint(vec({1, 0})));
  CHECK((mu.mat() - diag({0.25, -0.25})).norm() < 1e-15);

  // averaging over the standard basis gives zero
  for (int n1 : {2, 3, 4}) {
    CHECK(grad_F(uniform_basis(n1)).norm() < 1e-15);
  }

  // direct substitution at the diagonal point of RP^2
  const TracelessSym mu2 = moment_mu(ProjPoint(vec({1, 1, 1})));
  Eigen::MatrixXd expected =
      0.5 * (Eigen::MatrixXd::Ones(3, 3) / 3.0 -
             Eigen::MatrixXd::Identity(3, 3) / 3.0);
  CHECK((mu2.mat() - expected).norm() < 1e-15);
}

TEST_CASE("moment map norm is constant over RP^n") {
  Rng rng(31);
  for (int n1 : {2, 3, 4, 5}) {
    const double expected = 0.5 * std::sqrt((n1 - 1.0) / n1);
    for (int i = 0; i < 10; ++i) {
      const ProjPoint p(fixtures::random_point(rng, n1));
      CHECK(moment_mu(p).norm() == doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("gradient map of measures") {
  CHECK(grad_F(half_half_rp1()).norm() < 1e-15);
  const AtomicMeasure delta(2, {{ProjPoint(vec({1, 0})), 1.0}});
  CHECK((grad_F(delta).mat() - diag({0.25, -0.25})).norm() < 1e-15);
}

TEST_CASE("gradient map is K-equivariant") {
  Rng rng(32);
  for (int i = 0; i < 20; ++i) {
    const int n1 = rng.uniform_int(2, 4);
    const AtomicMeasure nu = fixtures::random_measure(rng, n1, rng.uniform_int(2, 5));
    const Eigen::MatrixXd k = rng.random_orthogonal(n1);
    const TracelessSym lhs = grad_F(pushforward(SpecialLinear(k), nu));
    const Eigen::MatrixXd rhs = k * grad_F(nu).mat() * k.transpose();
    CHECK((lhs.mat() - rhs).norm() <= 1e-12);
  }
}

TEST_CASE("kempf-ness function basics") {
  Rng rng(33);
  const AtomicMeasure nu = fixtures::random_measure(rng, 3, 4);
  CHECK(kn_function(nu, SpecialLinear::identity(3)) == doctest::Approx(0.0));

  // single atom on the expanding axis moves at slope 1/2
  const AtomicMeasure delta(2, {{ProjPoint(vec({1, 0})), 1.0}});
  for (double t : {0.3, 1.0, 2.5}) {
    const double psi = kn_function(delta, exp_sym(TracelessSym(diag({t, -t}))));
    CHECK(psi == doctest::Approx(t / 2).epsilon(1e-12));
  }
}

TEST_CASE("kempf-ness defining derivative property") {
  // d/dt Psi([x], exp(t xi)) must equal mu^xi at the flowed point
  Rng rng(34);
  for (int i = 0; i < 20; ++i) {
    const int n1 = rng.uniform_int(2, 4);
    const ProjPoint x(fixtures::random_point(rng, n1));
    const AtomicMeasure delta(n1, {{x, 1.0}});
    const TracelessSym xi = rng.random_direction(n1);
    const double t0 = rng.uniform(-1.0, 1.0);
    const double h = 1e-5;
    const double slope =
        (kn_function(delta, exp_sym(xi.scaled(t0 + h))) -
         kn_function(delta, exp_sym(xi.scaled(t0 - h)))) /
        (2 * h);
    const ProjPoint flowed(exp_sym(xi.scaled(t0)).mat() * x.coords());
    const double mu_xi = (moment_mu(flowed).mat() * xi.mat()).trace();
    CHECK(std::abs(slope - mu_xi) <= 1e-8);
  }
}

TEST_CASE("cocycle and K-invariance residuals") {
  Rng rng(35);
  for (int i = 0; i < 20; ++i) {
    const int n1 = rng.uniform_int(2, 4);
    const AtomicMeasure nu = fixtures::random_measure(rng, n1, rng.uniform_int(2, 5));
    const SpecialLinear g = exp_sym(rng.random_direction(n1).scaled(rng.uniform(0.0, 1.0)));
    const SpecialLinear h = exp_sym(rng.random_direction(n1).scaled(rng.uniform(0.0, 1.0)));
    const double res = std::abs(kn_function(nu, g) + kn_function(pushforward(g, nu), h) -
                                kn_function(nu, h * g));
    CHECK(res <= 1e-9);
    const SpecialLinear k{rng.random_orthogonal(n1)};
    CHECK(std::abs(kn_function(nu, k * g) - kn_function(nu, g)) <= 1e-9);
  }
}

TEST_CASE("morse-bott data of the RP^1 polystable measure") {
  const MorseBottDecomposition mb =
      morse_bott(half_half_rp1(), TracelessSym(diag({1, -1})));
  REQUIRE(mb.spec.groups() == 2);
  CHECK(mb.critical_values[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(mb.critical_values[1] == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(mb.unstable_masses[0] == doctest::Approx(0.5));
  CHECK(mb.unstable_masses[1] == doctest::Approx(0.5));
}

TEST_CASE("morse-bott masses concentrate on the top stratum") {
  // all atoms in the top eigenspace
  AtomicMeasure nu(3, {{ProjPoint(vec({1, 0, 0})), 0.6},
                       {ProjPoint(vec({1, 1, 0})), 0.4}});
  const MorseBottDecomposition mb =
      morse_bott(nu, TracelessSym(diag({1, 1, -2})));
  REQUIRE(mb.unstable_masses.size() == 2);
  CHECK(mb.unstable_masses[0] == doctest::Approx(1.0));
  CHECK(mb.unstable_masses[1] == doctest::Approx(0.0));
}

TEST_CASE("morse-bott masses always partition the total") {
  Rng rng(36);
  for (int i = 0; i < 20; ++i) {
    const int n1 = rng.uniform_int(2, 4);
    const AtomicMeasure nu = fixtures::random_measure(rng, n1, rng.uniform_int(2, 6));
    const MorseBottDecomposition mb = morse_bott(nu, rng.random_direction(n1));
    double total = 0.0;
    for (double m : mb.unstable_masses) {
      CHECK(m >= -1e-12);
      total += m;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(morse_bott(fixtures::random_measure(rng, 2, 2),
                             TracelessSym::zero(2)),
                  ZeroDirection);
}

TEST_CASE("maximal weight reference values") {
  // RP^1, equal masses: weight vanishes
  CHECK(maximal_weight(half_half_rp1(), TracelessSym(diag({1, -1}))) ==
        doctest::Approx(0.0).epsilon(1e-15));

  // RP^2, full mass on P(V_2) for xi = diag(1,1,-2)/sqrt(6)
  const AtomicMeasure delta3(3, {{ProjPoint(vec({0, 0, 1})), 1.0}});
  const TracelessSym xi(diag({1, 1, -2}));
  CHECK(maximal_weight(delta3, xi) ==
        doctest::Approx(-1.0 / std::sqrt(6.0)).epsilon(1e-12));

  // scale invariance of the normalized weight
  CHECK(maximal_weight(delta3, xi.scaled(7.5)) ==
        doctest::Approx(-1.0 / std::sqrt(6.0)).epsilon(1e-12));
}

TEST_CASE("maximal weight equals the asymptotic slope") {
  Rng rng(37);
  for (int i = 0; i < 30; ++i) {
    const int n1 = rng.uniform_int(2, 4);
    const AtomicMeasure nu = fixtures::random_measure(rng, n1, rng.uniform_int(2, 5));
    const TracelessSym xi = rng.random_direction(n1);
    const double formula = maximal_weight(nu, xi);
    const double slope = limit_slope(nu, xi);
    CHECK(std::abs(formula - slope) <= 1e-6);
  }
}

TEST_CASE("maximal weight is K-equivariant") {
  Rng rng(38);
  for (int i = 0; i < 20; ++i) {
    const int n1 = rng.uniform_int(2, 4);
    const AtomicMeasure nu = fixtures::random_measure(rng, n1, rng.uniform_int(2, 5));
    const TracelessSym xi = rng.random_direction(n1);
    const Eigen::MatrixXd k = rng.random_orthogonal(n1);
    const double a = maximal_weight(pushforward(SpecialLinear(k), nu),
                                    TracelessSym(k * xi.mat() * k.transpose()));
    const double b = maximal_weight(nu, xi);
    CHECK(std::abs(a - b) <= 1e-9);
  }
}

TEST_CASE("big lambda homogeneity") {
  Rng rng(39);
  const AtomicMeasure nu = fixtures::random_measure(rng, 3, 4);
  CHECK(big_lambda(nu, TracelessSym::zero(3)) == 0.0);
  for (int i = 0; i < 10; ++i) {
    const TracelessSym xi = rng.random_direction(3).scaled(rng.uniform(0.1, 2.0));
    CHECK(big_lambda(nu, xi.scaled(2.0)) ==
          doctest::Approx(2.0 * big_lambda(nu, xi)).epsilon(1e-9));
  }
}

TEST_CASE("gradient barycenter bound") {
  Rng rng(40);
  for (int i = 0; i < 20; ++i) {
    const int n1 = rng.uniform_int(2, 4);
    const AtomicMeasure nu = fixtures::random_measure(rng, n1, rng.uniform_int(2, 6));
    const TracelessSym xi = rng.random_direction(n1);
    const double pairing = (grad_F(nu).mat() * xi.mat()).trace();
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& a : nu.atoms()) {
      best = std::max(best, (moment_mu(a.point).mat() * xi.mat()).trace());
    }
    CHECK(pairing <= best + 1e-12);
  }
}

TEST_CASE("fixed atoms force a commuting gradient") {
  const AtomicMeasure nu(2, {{ProjPoint(vec({1, 0})), 0.7},
                             {ProjPoint(vec({0, 1})), 0.3}});
  const TracelessSym xi(diag({1, -1}));
  const Eigen::MatrixXd bracket =
      grad_F(nu).mat() * xi.mat() - xi.mat() * grad_F(nu).mat();
  CHECK(bracket.norm() <= 1e-9);
}

TEST_CASE("abelian moment") {
  CHECK(abelian_moment(uniform_basis(3), Eigen::MatrixXd::Identity(3, 3)).norm() <
        1e-14);
  const AtomicMeasure delta(2, {{ProjPoint(vec({1, 0})), 1.0}});
  const Eigen::VectorXd d = abelian_moment(delta, Eigen::MatrixXd::Identity(2, 2));
  CHECK(d(0) == doctest::Approx(0.25));
  CHECK(d(1) == doctest::Approx(-0.25));

  Rng rng(41);
  for (int i = 0; i < 10; ++i) {
    const AtomicMeasure nu = fixtures::random_measure(rng, 4, 5);
    const Eigen::VectorXd diag_part = abelian_moment(nu, rng.random_orthogonal(4));
    CHECK(std::abs(diag_part.sum()) <= 1e-12);
  }
}

TEST_CASE("axiom residuals on random instances") {
  Rng rng(42);
  for (int n1 : {2, 3, 4}) {
    for (int i = 0; i < 12; ++i) {
      const AtomicMeasure nu = fixtures::random_measure(rng, n1, rng.uniform_int(2, 5));
      const SpecialLinear g = exp_sym(rng.random_direction(n1).scaled(rng.uniform(0.0, 1.0)));
      const SpecialLinear h = exp_sym(rng.random_direction(n1).scaled(rng.uniform(0.0, 1.0)));
      const TracelessSym xi = rng.random_direction(n1);
      const AxiomReport rep = axiom_residuals(nu, g, h, xi, default_grid(), rng.raw());
      CHECK(rep.max_residual() <= 1e-8);
    }
  }
}

TEST_CASE("flatness detects fixed and moving atoms") {
  // both atoms fixed: flat direction, zero curvature
  const AxiomReport flat = axiom_residuals(
      half_half_rp1(), SpecialLinear::identity(2), SpecialLinear::identity(2),
      TracelessSym(diag({1, -1})), default_grid(), 7);
  CHECK(flat.second_derivative_zero);
  CHECK(flat.all_atoms_fixed);
  CHECK(flat.max_residual() <= 1e-8);

  // atom off the eigenvector axes: strictly convex
  const AtomicMeasure off(2, {{ProjPoint(vec({1, 1})), 1.0}});
  const AxiomReport curved = axiom_residuals(
      off, SpecialLinear::identity(2), SpecialLinear::identity(2),
      TracelessSym(diag({1, -1})), default_grid(), 7);
  CHECK_FALSE(curved.second_derivative_zero);
  CHECK_FALSE(curved.all_atoms_fixed);
}
