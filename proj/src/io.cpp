#include "gitstab/io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace gitstab {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Rat json_to_rational(const nlohmann::json& v, const char* what) {
  if (v.is_number_integer()) return Rat(static_cast<long>(v.get<long long>()));
  if (v.is_string()) {
    auto r = parse_rational(v.get<std::string>());
    if (!r) throw ParseError(std::string(what) + ": bad rational literal");
    return *r;
  }
  throw ParseError(std::string(what) +
                   ": exact mode needs integers or \"p/q\" strings");
}

double json_to_double(const nlohmann::json& v, const char* what) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    auto r = parse_rational(v.get<std::string>());
    if (!r) throw ParseError(std::string(what) + ": bad rational literal");
    return to_double(*r);
  }
  throw ParseError(std::string(what) + ": expected number or \"p/q\" string");
}

}  // namespace

AtomicMeasure parse_measure_json(const std::string& text, bool* exact_out) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("measure file: ") + e.what());
  }
  if (!j.is_object() || !j.contains("n") || !j.contains("atoms")) {
    throw ParseError("measure file: need object with \"n\" and \"atoms\"");
  }
  if (!j["n"].is_number_integer() || j["n"].get<int>() < 1) {
    throw ParseError("measure file: \"n\" must be an integer >= 1");
  }
  const int n1 = j["n"].get<int>() + 1;
  const std::string mode = j.value("mode", std::string("float"));
  if (mode != "float" && mode != "exact") {
    throw ParseError("measure file: mode must be \"float\" or \"exact\"");
  }
  const bool exact = mode == "exact";
  if (!j["atoms"].is_array() || j["atoms"].empty()) {
    throw ParseError("measure file: \"atoms\" must be a nonempty array");
  }

  if (exact) {
    std::vector<ExactAtom> raw;
    for (const auto& a : j["atoms"]) {
      if (!a.contains("x") || !a.contains("w") || !a["x"].is_array()) {
        throw ParseError("measure file: atom needs \"x\" and \"w\"");
      }
      if (static_cast<int>(a["x"].size()) != n1) {
        throw DimensionMismatch("measure file: atom vector length != n+1");
      }
      ExactAtom ea;
      for (const auto& c : a["x"]) ea.coords.push_back(json_to_rational(c, "x"));
      ea.weight = json_to_rational(a["w"], "w");
      if (ea.weight <= 0) throw ParseError("measure file: weights must be > 0");
      raw.push_back(std::move(ea));
    }
    Rat total(0);
    for (const auto& ea : raw) total += ea.weight;
    if (total != 1) throw ParseError("measure file: exact weights must sum to 1");
    // exact merge of projectively equal atoms, then the float view
    std::vector<ExactAtom> merged;
    for (auto& ea : raw) {
      bool found = false;
      for (auto& mm : merged) {
        if (rat_parallel(mm.coords, ea.coords)) {
          mm.weight += ea.weight;
          found = true;
          break;
        }
      }
      if (!found) merged.push_back(std::move(ea));
    }
    std::vector<Atom> atoms;
    for (const auto& mm : merged) {
      Eigen::VectorXd v(n1);
      for (int i = 0; i < n1; ++i) v(i) = to_double(mm.coords[i]);
      atoms.push_back({ProjPoint(std::move(v)), to_double(mm.weight)});
    }
    AtomicMeasure out(n1, std::move(atoms));
    if (out.size() != static_cast<int>(merged.size())) {
      throw ParseError(
          "measure file: atoms projectively equal in floats but not as "
          "rationals");
    }
    out.set_exact({n1, std::move(merged)});
    if (exact_out) *exact_out = true;
    return out;
  }

  std::vector<Atom> atoms;
  for (const auto& a : j["atoms"]) {
    if (!a.contains("x") || !a.contains("w") || !a["x"].is_array()) {
      throw ParseError("measure file: atom needs \"x\" and \"w\"");
    }
    if (static_cast<int>(a["x"].size()) != n1) {
      throw DimensionMismatch("measure file: atom vector length != n+1");
    }
    Eigen::VectorXd v(n1);
    for (int i = 0; i < n1; ++i) v(i) = json_to_double(a["x"][i], "x");
    const double w = json_to_double(a["w"], "w");
    if (!(w > 0.0)) throw ParseError("measure file: weights must be > 0");
    atoms.push_back({ProjPoint(std::move(v)), w});
  }
  double total = 0.0;
  for (const auto& a : atoms) total += a.weight;
  if (std::abs(total - 1.0) > 1e-9) {
    throw ParseError("measure file: weights sum to " + std::to_string(total));
  }
  if (exact_out) *exact_out = false;
  return AtomicMeasure(n1, std::move(atoms));
}

LoadedMeasure load_measure_file(const std::string& path) {
  const std::string text = read_file(path);
  bool exact = false;
  AtomicMeasure m = parse_measure_json(text, &exact);
  return {std::move(m), exact, fnv1a_hex(text)};
}

TracelessSym load_xi_file(const std::string& path, int n_plus_1,
                          double* adjustment) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("xi file: ") + e.what());
  }
  if (!j.is_object() || !j.contains("m") || !j["m"].is_array()) {
    throw ParseError("xi file: need object with matrix \"m\"");
  }
  if (static_cast<int>(j["m"].size()) != n_plus_1) {
    throw DimensionMismatch("xi file: matrix size != n+1");
  }
  Eigen::MatrixXd m(n_plus_1, n_plus_1);
  for (int r = 0; r < n_plus_1; ++r) {
    const auto& row = j["m"][r];
    if (!row.is_array() || static_cast<int>(row.size()) != n_plus_1) {
      throw DimensionMismatch("xi file: row length != n+1");
    }
    for (int c = 0; c < n_plus_1; ++c) m(r, c) = json_to_double(row[c], "m");
  }
  return TracelessSym(std::move(m), adjustment);
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace gitstab
