#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace ehrenc {

/// Whole-file read; throws Error when the file is missing or unreadable.
std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary and renames it over the destination, so
/// readers never observe a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

}  // namespace ehrenc
