#pragma once

#include <string>
#include <string_view>

namespace nimcav {

inline constexpr const char* code_version = "0.3.0";

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

} // namespace nimcav
