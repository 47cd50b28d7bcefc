#pragma once

// Seeded fixture generators shared by the unit and acceptance suites.

#include <string>
#include <vector>

#include "gitstab/classifier.hpp"
#include "gitstab/measure.hpp"
#include "gitstab/rng.hpp"

namespace fixtures {

using gitstab::Atom;
using gitstab::AtomicMeasure;
using gitstab::ProjPoint;
using gitstab::Rng;

inline Eigen::VectorXd random_point(Rng& rng, int n1) {
  Eigen::VectorXd v = rng.gaussian_vector(n1);
  while (v.norm() < 1e-3) v = rng.gaussian_vector(n1);
  return v;
}

/// m distinct random atoms with Dirichlet-style weights.
inline AtomicMeasure random_measure(Rng& rng, int n1, int m) {
  std::vector<Atom> atoms;
  std::vector<double> w(m);
  double total = 0.0;
  for (int i = 0; i < m; ++i) {
    w[i] = 0.05 + rng.uniform();
    total += w[i];
  }
  for (int i = 0; i < m; ++i) {
    ProjPoint p(random_point(rng, n1));
    bool distinct = true;
    for (const auto& a : atoms) {
      if (ProjPoint::proj_dist(a.point, p) < 1e-3) distinct = false;
    }
    if (!distinct) {
      --i;
      continue;
    }
    atoms.push_back({std::move(p), w[i] / total});
  }
  return AtomicMeasure(n1, std::move(atoms), true);
}

/// Random measure that classifies Stable with margin at least min_margin.
inline AtomicMeasure random_stable_measure(Rng& rng, int n1,
                                           double min_margin = 0.02) {
  for (;;) {
    const int m = n1 + 1 + rng.uniform_int(1, 3);
    AtomicMeasure nu = random_measure(rng, n1, m);
    // flatten the weight spread toward uniform to help the margins
    std::vector<Atom> atoms = nu.atoms();
    for (auto& a : atoms) a.weight = 0.5 * a.weight + 0.5 / m;
    nu = AtomicMeasure(n1, std::move(atoms), true);
    const auto v = gitstab::classify(nu);
    if (v.kind == gitstab::StabilityKind::Stable && v.margin >= min_margin) {
      return nu;
    }
  }
}

/// One atom planted above the point-mass threshold by `excess`, the rest
/// light and generic.
inline AtomicMeasure planted_unstable_measure(Rng& rng, int n1,
                                              double excess = 0.1) {
  const int m = n1 + 2;
  const double heavy = 1.0 / n1 + excess;
  std::vector<Atom> atoms;
  atoms.push_back({ProjPoint(random_point(rng, n1)), heavy});
  for (int i = 1; i < m; ++i) {
    ProjPoint p(random_point(rng, n1));
    bool distinct = true;
    for (const auto& a : atoms) {
      if (ProjPoint::proj_dist(a.point, p) < 1e-3) distinct = false;
    }
    if (!distinct) {
      --i;
      continue;
    }
    atoms.push_back({std::move(p), (1.0 - heavy) / (m - 1)});
  }
  return AtomicMeasure(n1, std::move(atoms), true);
}

/// Exact measure from rational strings; also usable as a float fixture.
inline AtomicMeasure exact_measure(
    int n1, const std::vector<std::pair<std::vector<std::string>,
                                        std::string>>& spec_atoms) {
  std::vector<gitstab::ExactAtom> exact;
  for (const auto& [coords, weight] : spec_atoms) {
    gitstab::ExactAtom ea;
    for (int i = 0; i < n1; ++i) ea.coords.push_back(*gitstab::parse_rational(coords[i]));
    ea.weight = *gitstab::parse_rational(weight);
    bool merged = false;
    for (auto& e : exact) {
      if (gitstab::rat_parallel(e.coords, ea.coords)) {
        e.weight += ea.weight;
        merged = true;
        break;
      }
    }
    if (!merged) exact.push_back(std::move(ea));
  }
  std::vector<Atom> atoms;
  for (const auto& ea : exact) {
    Eigen::VectorXd v(n1);
    for (int i = 0; i < n1; ++i) v(i) = gitstab::to_double(ea.coords[i]);
    atoms.push_back({ProjPoint(std::move(v)), gitstab::to_double(ea.weight)});
  }
  AtomicMeasure nu(n1, std::move(atoms));
  nu.set_exact({n1, std::move(exact)});
  return nu;
}

/// Measure file JSON bodies for the CLI tests.
inline std::string measure_json(
    int n, const std::vector<std::pair<std::vector<std::string>,
                                       std::string>>& spec_atoms,
    bool exact) {
  std::string s = "{\"n\": " + std::to_string(n) + ", \"mode\": \"";
  s += exact ? "exact" : "float";
  s += "\", \"atoms\": [";
  bool first_atom = true;
  for (const auto& [coords, weight] : spec_atoms) {
    if (!first_atom) s += ", ";
    first_atom = false;
    s += "{\"x\": [";
    for (size_t i = 0; i < coords.size(); ++i) {
      if (i) s += ", ";
      s += "\"" + coords[i] + "\"";
    }
    s += "], \"w\": \"" + weight + "\"}";
  }
  s += "]}";
  return s;
}

// Hand-built RP^2 fixtures covering the verdict classes.

// Stable: four atoms in general position, uniform weights.
inline AtomicMeasure rp2_stable_uniform4() {
  return exact_measure(3, {
      {{"1", "0", "0"}, "1/4"},
      {{"0", "1", "0"}, "1/4"},
      {{"0", "0", "1"}, "1/4"},
      {{"1", "1", "1"}, "1/4"},
  });
}

// Stable, different construction: six atoms, uneven weights.
inline AtomicMeasure rp2_stable_six() {
  return exact_measure(3, {
      {{"1", "0", "0"}, "1/5"},
      {{"0", "1", "0"}, "1/5"},
      {{"0", "0", "1"}, "1/5"},
      {{"1", "1", "1"}, "1/10"},
      {{"1", "-1", "2"}, "1/5"},
      {{"2", "1", "-1"}, "1/10"},
  });
}

// Polystable: the uniform three-point measure.
inline AtomicMeasure rp2_polystable_thirds() {
  return exact_measure(3, {
      {{"1", "0", "0"}, "1/3"},
      {{"0", "1", "0"}, "1/3"},
      {{"0", "0", "1"}, "1/3"},
  });
}

// Polystable: 2/3 on a line (stable inside it) plus 1/3 on an outside point.
inline AtomicMeasure rp2_polystable_line_point() {
  return exact_measure(3, {
      {{"1", "0", "0"}, "2/9"},
      {{"0", "1", "0"}, "2/9"},
      {{"1", "1", "0"}, "2/9"},
      {{"0", "0", "1"}, "1/3"},
  });
}

// Semistable, not polystable: one tight point, remainder spanning.
inline AtomicMeasure rp2_semistable_point() {
  return exact_measure(3, {
      {{"1", "0", "0"}, "1/3"},
      {{"0", "1", "0"}, "2/9"},
      {{"0", "0", "1"}, "2/9"},
      {{"1", "1", "1"}, "2/9"},
  });
}

// Semistable, not polystable: tight line whose restriction is only
// polystable, tight points underneath it.
inline AtomicMeasure rp2_semistable_line() {
  return exact_measure(3, {
      {{"1", "0", "0"}, "1/3"},
      {{"0", "1", "0"}, "1/3"},
      {{"0", "0", "1"}, "1/6"},
      {{"1", "1", "1"}, "1/6"},
  });
}

// Unstable: a point above 1/3.
inline AtomicMeasure rp2_unstable_point() {
  return exact_measure(3, {
      {{"1", "0", "0"}, "2/5"},
      {{"0", "1", "0"}, "3/10"},
      {{"0", "0", "1"}, "3/10"},
  });
}

// Unstable: three coplanar atoms carrying 4/5 > 2/3.
inline AtomicMeasure rp2_unstable_plane() {
  return exact_measure(3, {
      {{"1", "0", "0"}, "3/10"},
      {{"0", "1", "0"}, "3/10"},
      {{"1", "1", "0"}, "1/5"},
      {{"0", "0", "1"}, "1/5"},
  });
}

inline std::vector<std::pair<AtomicMeasure, gitstab::StabilityKind>>
rp2_fixture_suite() {
  using gitstab::StabilityKind;
  return {
      {rp2_stable_uniform4(), StabilityKind::Stable},
      {rp2_stable_six(), StabilityKind::Stable},
      {rp2_polystable_thirds(), StabilityKind::PolystableNotStable},
      {rp2_polystable_line_point(), StabilityKind::PolystableNotStable},
      {rp2_semistable_point(), StabilityKind::SemistableNotPolystable},
      {rp2_semistable_line(), StabilityKind::SemistableNotPolystable},
      {rp2_unstable_point(), StabilityKind::Unstable},
      {rp2_unstable_plane(), StabilityKind::Unstable},
  };
}

}  // namespace fixtures
