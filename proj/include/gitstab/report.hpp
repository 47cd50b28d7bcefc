#pragma once

#include <string>

#include "json.hpp"

namespace gitstab {

/// Serializes with sorted object keys and every floating-point number
/// rendered at 17 significant digits, so identical inputs give identical
/// bytes.
std::string serialize_report(const nlohmann::json& j);

/// One JSON value on a single line (trace records).
std::string serialize_line(const nlohmann::json& j);

}  // namespace gitstab
