#include "recluster/json_writer.hpp"

#include <cmath>
#include <cstdio>

namespace recluster {

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

void write(const nlohmann::ordered_json& v, int indent, int level, std::string& out) {
  const auto pad = [&](int lvl) {
    if (indent > 0) {
      out += '\n';
      out.append(static_cast<std::size_t>(indent * lvl), ' ');
    }
  };

  switch (v.type()) {
    case nlohmann::json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (const auto& [key, item] : v.items()) {
        if (!first) out += ',';
        first = false;
        pad(level + 1);
        out += nlohmann::ordered_json(key).dump();
        out += indent > 0 ? ": " : ":";
        write(item, indent, level + 1, out);
      }
      pad(level);
      out += '}';
      return;
    }
    case nlohmann::json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      const bool flat = std::all_of(v.begin(), v.end(), [](const auto& e) { return e.is_primitive(); });
      out += '[';
      bool first = true;
      for (const auto& item : v) {
        if (!first) out += flat && indent > 0 ? ", " : ",";
        first = false;
        if (!flat) pad(level + 1);
        write(item, indent, level + 1, out);
      }
      if (!flat) pad(level);
      out += ']';
      return;
    }
    case nlohmann::json::value_t::number_float: {
      const double d = v.get<double>();
      out += std::isfinite(d) ? format_real(d) : "null";
      return;
    }
    default:
      out += v.dump();
      return;
  }
}

}  // namespace

std::string dump_json(const nlohmann::ordered_json& value, int indent) {
  std::string out;
  write(value, indent, 0, out);
  out += '\n';
  return out;
}

}  // namespace recluster
