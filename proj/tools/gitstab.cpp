#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gitstab/balancer.hpp"
#include "gitstab/classifier.hpp"
#include "gitstab/io.hpp"
#include "gitstab/kempf_ness.hpp"
#include "gitstab/report.hpp"
#include "gitstab/rng.hpp"

namespace {

using namespace gitstab;
using nlohmann::json;

// Exit codes: 0-3 verdicts, 4 diverged, 5 max-iterations, 10 parse error,
// 11 dimension mismatch, 12 enumeration guard, 13 zero direction,
// 14 axiom failure.
constexpr int kExitParse = 10;
constexpr int kExitDimension = 11;
constexpr int kExitGuard = 12;
constexpr int kExitZeroDirection = 13;
constexpr int kExitAxiom = 14;

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json flat_json(const SupportFlat& f) {
  json j;
  j["dim"] = f.dim;
  j["mass"] = f.mass;
  j["atoms"] = f.atom_indices;
  j["basis"] = matrix_json(f.basis);
  return j;
}

json verdict_json(const AtomicMeasure& nu, const StabilityVerdict& v) {
  json j;
  j["kind"] = to_string(v.kind);
  j["certified"] = v.certified;
  j["needs_exact"] = v.needs_exact;
  j["exact"] = v.exact;
  j["sampled"] = v.sampled;
  j["margin"] = v.margin;
  j["witness_flat"] = v.witness_flat ? flat_json(*v.witness_flat) : json();
  j["witness_direction"] =
      v.witness_direction ? matrix_json(v.witness_direction->mat()) : json();
  json splitting = json::array();
  for (const auto& p : v.splitting) {
    json pj = flat_json(p.flat);
    pj["inner_margin"] = p.inner_margin;
    splitting.push_back(std::move(pj));
  }
  j["splitting"] = std::move(splitting);
  const std::string check = verify_verdict(nu, v);
  j["witness_verified"] = check.empty();
  if (!check.empty()) j["witness_check_detail"] = check;
  return j;
}

int verdict_exit_code(StabilityKind k) {
  switch (k) {
    case StabilityKind::Stable: return 0;
    case StabilityKind::PolystableNotStable: return 1;
    case StabilityKind::SemistableNotPolystable: return 2;
    case StabilityKind::Unstable: return 3;
  }
  return kExitParse;
}

struct CommonArgs {
  std::string file;
  std::uint64_t seed = 0;
};

void print_report(json j) { std::cout << serialize_report(j); }

int run_classify(const CommonArgs& common, bool exact_flag, double tol,
                 int samples) {
  LoadedMeasure lm = load_measure_file(common.file);
  if (exact_flag && !lm.exact) {
    throw ParseError("exact mode requested but the file is not in exact mode");
  }
  ClassifyOptions opt;
  opt.membership_tol = tol;
  opt.equality_tol = tol;

  StabilityVerdict verdict;
  if (lm.measure.size() > kSupportFlatsGuard) {
    if (samples <= 0) {
      throw TooManyAtoms("atom count exceeds enumeration guard; pass --samples");
    }
    verdict = classify_sampled(lm.measure, samples, common.seed, opt);
  } else {
    verdict = classify(lm.measure, opt);
  }
  const CrossCheckReport cc = numerical_cross_check(
      lm.measure, verdict, samples > 0 ? samples : 200, common.seed);

  json j;
  j["anchor"] = "projstab";
  j["command"] = "classify";
  j["input_digest"] = lm.digest;
  j["seed"] = common.seed;
  j["version"] = kVersion;
  j["verdict"] = verdict_json(lm.measure, verdict);
  json ccj;
  ccj["anchor"] = "stabile";
  ccj["consistent"] = cc.consistent;
  ccj["min_random"] = cc.min_random;
  ccj["min_flat_derived"] = cc.min_flat_derived;
  ccj["min_abelian"] = cc.min_abelian;
  ccj["witness_lambda"] = cc.witness_lambda ? json(*cc.witness_lambda) : json();
  ccj["flat_direction_count"] = cc.flat_direction_count;
  if (!cc.detail.empty()) ccj["detail"] = cc.detail;
  j["cross_check"] = std::move(ccj);
  print_report(j);
  if (!cc.consistent) {
    std::cerr << "cross-check mismatch: " << cc.detail << "\n";
  }
  return verdict_exit_code(verdict.kind);
}

int run_balance(const CommonArgs& common, double tol, int max_iter,
                const std::string& trace_path) {
  LoadedMeasure lm = load_measure_file(common.file);
  BalanceOptions opt;
  opt.tol = tol;
  opt.max_iter = max_iter;
  const BalanceResult res = balance(lm.measure, opt);

  if (!trace_path.empty()) {
    std::ofstream out(trace_path);
    if (!out) throw Error("cannot open trace file " + trace_path);
    for (size_t i = 0; i < res.trace.size(); ++i) {
      json t;
      t["iter"] = i;
      t["psi"] = res.trace[i].psi;
      t["residual"] = res.trace[i].residual;
      t["step"] = res.trace[i].step;
      out << serialize_line(t) << "\n";
    }
  }

  json j;
  j["anchor"] = "critical-point";
  j["command"] = "balance";
  j["input_digest"] = lm.digest;
  j["seed"] = common.seed;
  j["version"] = kVersion;
  j["status"] = to_string(res.status);
  j["g"] = matrix_json(res.g.mat());
  j["residual"] = res.residual;
  j["iterations"] = res.iterations;
  try {
    j["isotropy"] = isotropy_check(lm.measure, res.g);
    j["psi_final"] = kn_function(lm.measure, res.g);
  } catch (const SingularInput&) {
    // atoms can underflow under an escaped transform
    j["isotropy"] = json();
    j["psi_final"] = json();
  }
  j["escape_direction"] =
      res.escape_direction ? matrix_json(res.escape_direction->mat()) : json();
  print_report(j);
  switch (res.status) {
    case BalanceStatus::Converged: return 0;
    case BalanceStatus::Diverged: return 4;
    case BalanceStatus::MaxIterations: return 5;
  }
  return kExitParse;
}

TracelessSym parse_xi_argument(const std::string& arg, const AtomicMeasure& nu,
                               double* adjustment) {
  if (arg.rfind("flat:", 0) == 0) {
    std::vector<int> indices;
    std::string rest = arg.substr(5);
    size_t pos = 0;
    while (pos < rest.size()) {
      size_t comma = rest.find(',', pos);
      if (comma == std::string::npos) comma = rest.size();
      try {
        indices.push_back(std::stoi(rest.substr(pos, comma - pos)));
      } catch (const std::exception&) {
        throw ParseError("bad flat atom index in --xi");
      }
      pos = comma + 1;
    }
    if (indices.empty()) throw ParseError("--xi flat: needs atom indices");
    for (int i : indices) {
      if (i < 0 || i >= nu.size()) throw ParseError("--xi flat: index out of range");
    }
    const Eigen::MatrixXd basis = atom_span_basis(nu, indices);
    const int n1 = nu.dim();
    const int d = static_cast<int>(basis.cols());
    if (adjustment) *adjustment = 0.0;
    return TracelessSym(d * Eigen::MatrixXd::Identity(n1, n1) -
                        n1 * basis * basis.transpose());
  }
  return load_xi_file(arg, nu.dim(), adjustment);
}

int run_weight(const CommonArgs& common, const std::string& xi_arg) {
  LoadedMeasure lm = load_measure_file(common.file);
  double adjustment = 0.0;
  const TracelessSym xi = parse_xi_argument(xi_arg, lm.measure, &adjustment);
  if (adjustment > 1e-8) {
    std::cerr << "warning: xi symmetrization/trace projection moved the input by "
              << adjustment << "\n";
  }
  if (xi.norm() <= 1e-12) throw ZeroDirection("weight: xi is zero");
  const TracelessSym xh = xi.scaled(1.0 / xi.norm());

  const double lambda = maximal_weight(lm.measure, xi);
  const MorseBottDecomposition mb = morse_bott(lm.measure, xh);
  const double slope = limit_slope(lm.measure, xi);

  json j;
  j["anchor"] = "lambdaxi";
  j["command"] = "weight";
  j["input_digest"] = lm.digest;
  j["seed"] = common.seed;
  j["version"] = kVersion;
  j["lambda"] = lambda;
  j["limit_slope"] = slope;
  j["limit_delta"] = std::abs(lambda - slope);
  j["xi_norm"] = xi.norm();
  j["xi_adjustment"] = adjustment;
  j["xi_unit"] = matrix_json(xh.mat());
  json table = json::array();
  for (int g = 0; g < mb.spec.groups(); ++g) {
    json row;
    row["anchor"] = "calcolo-lambda";
    row["eig"] = mb.spec.eigs[g];
    row["dim"] = mb.spec.space_dim(g);
    row["critical_value"] = mb.critical_values[g];
    row["mass"] = mb.unstable_masses[g];
    table.push_back(std::move(row));
  }
  j["table"] = std::move(table);
  print_report(j);
  return 0;
}

int run_validate(const CommonArgs& common, int samples, bool break_cocycle) {
  LoadedMeasure lm = load_measure_file(common.file);
  const AtomicMeasure& nu = lm.measure;
  const int n1 = nu.dim();
  Rng rng(common.seed);

  std::vector<double> grid;
  for (int i = 0; i <= 20; ++i) grid.push_back(-2.0 + 0.2 * i);
  constexpr double kBound = 1e-8;

  AxiomReport worst;
  json violating;
  bool failed = false;
  for (int s = 0; s < samples; ++s) {
    const SpecialLinear g =
        exp_sym(rng.random_direction(n1).scaled(rng.uniform(0.0, 1.0)));
    const SpecialLinear h =
        exp_sym(rng.random_direction(n1).scaled(rng.uniform(0.0, 1.0)));
    const TracelessSym xi = rng.random_direction(n1);
    AxiomReport rep = axiom_residuals(nu, g, h, xi, grid, rng.raw());
    if (break_cocycle) {
      // Test hook: the cocycle check re-run with a deliberately non-cocycle
      // functional (adds 0.001 |g|_F^2 to each value).
      auto broken = [&](const AtomicMeasure& m, const SpecialLinear& gg) {
        return kn_function(m, gg) + 1e-3 * gg.mat().squaredNorm();
      };
      rep.cocycle = std::abs(broken(nu, g) + broken(pushforward(g, nu), h) -
                             broken(nu, h * g));
    }
    worst.cocycle = std::max(worst.cocycle, rep.cocycle);
    worst.k_invariance = std::max(worst.k_invariance, rep.k_invariance);
    worst.convexity_violation =
        std::max(worst.convexity_violation, rep.convexity_violation);
    worst.gradient_consistency =
        std::max(worst.gradient_consistency, rep.gradient_consistency);
    worst.flatness_consistency =
        std::max(worst.flatness_consistency, rep.flatness_consistency);
    worst.lipschitz_excess = std::max(worst.lipschitz_excess, rep.lipschitz_excess);
    if (!failed && rep.max_residual() > kBound) {
      failed = true;
      violating["sample_index"] = s;
      violating["g"] = matrix_json(g.mat());
      violating["h"] = matrix_json(h.mat());
      violating["xi"] = matrix_json(xi.mat());
      violating["residuals"] = {
          {"cocycle", rep.cocycle},
          {"k_invariance", rep.k_invariance},
          {"convexity_violation", rep.convexity_violation},
          {"gradient_consistency", rep.gradient_consistency},
          {"flatness_consistency", rep.flatness_consistency},
          {"lipschitz_excess", rep.lipschitz_excess},
      };
    }
  }

  json j;
  j["anchor"] = "P1-P6";
  j["command"] = "validate";
  j["input_digest"] = lm.digest;
  j["seed"] = common.seed;
  j["version"] = kVersion;
  j["samples"] = samples;
  j["bound"] = kBound;
  j["max_residuals"] = {
      {"cocycle", worst.cocycle},
      {"k_invariance", worst.k_invariance},
      {"convexity_violation", worst.convexity_violation},
      {"gradient_consistency", worst.gradient_consistency},
      {"flatness_consistency", worst.flatness_consistency},
      {"lipschitz_excess", worst.lipschitz_excess},
  };
  j["pass"] = !failed;
  j["violating_instance"] = failed ? violating : json();
  print_report(j);
  return failed ? kExitAxiom : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stability of weighted point configurations on real projective space"};
  app.require_subcommand(1);

  CommonArgs common;
  bool exact_flag = false;
  double classify_tol = 1e-9;
  int classify_samples = 0;
  double balance_tol = 1e-10;
  int balance_max_iter = 10000;
  std::string trace_path;
  std::string xi_arg;
  int validate_samples = 100;
  bool break_cocycle = false;

  auto* c_classify = app.add_subcommand("classify", "classify a measure file");
  c_classify->add_option("file", common.file)->required();
  c_classify->add_flag("--exact", exact_flag, "require exact (rational) mode");
  c_classify->add_option("--tol", classify_tol, "membership/equality tolerance");
  c_classify->add_option("--samples", classify_samples,
                         "cross-check sample count; enables the sampled "
                         "classifier beyond the atom guard");
  c_classify->add_option("--seed", common.seed);

  auto* c_balance = app.add_subcommand("balance", "balance a measure file");
  c_balance->add_option("file", common.file)->required();
  c_balance->add_option("--tol", balance_tol, "gradient norm tolerance");
  c_balance->add_option("--max-iter", balance_max_iter);
  c_balance->add_option("--trace", trace_path, "write per-iteration JSON lines");
  c_balance->add_option("--seed", common.seed);

  auto* c_weight = app.add_subcommand("weight", "maximal weight of a direction");
  c_weight->add_option("file", common.file)->required();
  c_weight->add_option("--xi", xi_arg, "matrix file or flat:<i,j,...>")->required();
  c_weight->add_option("--seed", common.seed);

  auto* c_validate = app.add_subcommand("validate", "run the axiom checks");
  c_validate->add_option("file", common.file)->required();
  c_validate->add_option("--samples", validate_samples);
  c_validate->add_option("--seed", common.seed);
  c_validate->add_flag("--break-cocycle", break_cocycle,
                       "negative control: corrupt the cocycle check");

  CLI11_PARSE(app, argc, argv);

  if (const char* env = std::getenv("GITSTAB_EXACT")) {
    if (std::string(env) == "1") exact_flag = true;
  }

  try {
    if (c_classify->parsed()) {
      return run_classify(common, exact_flag, classify_tol, classify_samples);
    }
    if (c_balance->parsed()) {
      return run_balance(common, balance_tol, balance_max_iter, trace_path);
    }
    if (c_weight->parsed()) return run_weight(common, xi_arg);
    if (c_validate->parsed()) {
      return run_validate(common, validate_samples, break_cocycle);
    }
  } catch (const DimensionMismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDimension;
  } catch (const TooManyAtoms& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitGuard;
  } catch (const ZeroDirection& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitZeroDirection;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  }
  return kExitParse;
}
