#pragma once

#include <json.hpp>
#include <string>

namespace recluster {

/// Serialises with object keys in insertion order and every floating-point number printed
/// with 17 significant digits. Non-finite numbers become null.
std::string dump_json(const nlohmann::ordered_json& value, int indent = 2);

/// 17-significant-digit text of a double, as used in every output file.
std::string format_real(double v);

}  // namespace recluster
