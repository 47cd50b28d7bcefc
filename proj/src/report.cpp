#include "gitstab/report.hpp"

#include <cmath>
#include <cstdio>

namespace gitstab {

namespace {

void emit(const nlohmann::json& j, std::string& out, int indent, int depth) {
  const std::string pad(indent * depth, ' ');
  const std::string pad_in(indent * (depth + 1), ' ');
  const char* nl = indent > 0 ? "\n" : "";
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{";
      out += nl;
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) {
          out += ",";
          out += nl;
        }
        first = false;
        out += pad_in;
        out += nlohmann::json(it.key()).dump();
        out += indent > 0 ? ": " : ":";
        emit(it.value(), out, indent, depth + 1);
      }
      out += nl;
      out += pad;
      out += "}";
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[";
      out += nl;
      bool first = true;
      for (const auto& v : j) {
        if (!first) {
          out += ",";
          out += nl;
        }
        first = false;
        out += pad_in;
        emit(v, out, indent, depth + 1);
      }
      out += nl;
      out += pad;
      out += "]";
      return;
    }
    case nlohmann::json::value_t::number_float: {
      const double d = j.get<double>();
      if (!std::isfinite(d)) {
        out += "null";
        return;
      }
      char buf[40];
      std::snprintf(buf, sizeof(buf), "%.17g", d);
      out += buf;
      return;
    }
    default:
      out += j.dump();
      return;
  }
}

}  // namespace

std::string serialize_report(const nlohmann::json& j) {
  std::string out;
  emit(j, out, 2, 0);
  out += "\n";
  return out;
}

std::string serialize_line(const nlohmann::json& j) {
  std::string out;
  emit(j, out, 0, 0);
  return out;
}

}  // namespace gitstab
