#pragma once

#include <string>

#include "gitstab/linalg.hpp"
#include "gitstab/measure.hpp"

namespace gitstab {

inline constexpr const char* kVersion = "0.1.0";

struct LoadedMeasure {
  AtomicMeasure measure;
  bool exact = false;
  std::string digest;  // content hash of the file bytes
};

/// Measure file: { "n": <int >= 1>, "mode": "float"|"exact",
///                 "atoms": [ { "x": [...], "w": ... }, ... ] }.
/// Vectors may be unnormalized; entries are numbers or "p/q" strings
/// (exact mode requires every entry rational). The loader normalizes,
/// canonicalizes, merges near-coincident atoms and checks the total mass
/// (1e-9 in float mode, exactly in exact mode).
LoadedMeasure load_measure_file(const std::string& path);

/// Same grammar, from an in-memory JSON string (no digest).
AtomicMeasure parse_measure_json(const std::string& text, bool* exact = nullptr);

/// Direction file: { "m": [[row], [row], ...] }. The matrix is symmetrized
/// and trace-projected; *adjustment receives the size of that correction.
TracelessSym load_xi_file(const std::string& path, int n_plus_1,
                          double* adjustment = nullptr);

/// FNV-1a 64-bit hash as 16 hex characters.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace gitstab
