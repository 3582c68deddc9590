#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace pinncal {

/// Writes `content` to a sibling temporary file and renames it over `path`.
void write_text_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_text(const std::filesystem::path& path);

/// 64-bit FNV-1a, rendered as 16 hex digits.
std::string fnv1a_hex(std::string_view data);

/// Shortest-safe round-trip formatting ("%.17g").
std::string format_double(double v);

}  // namespace pinncal
