#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace fcl {

/// Shortest text that has 17 significant digits (`%.17g`).
std::string format_double(double value);

/// Writes to a sibling temporary file and renames it over `path`.
void atomic_write(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

/// Splits "0.7,0.3" style lists; throws ValidationError on bad numbers.
std::vector<double> parse_number_list(std::string_view text);

/// Whitespace- or comma-separated numbers.
std::vector<double> read_numbers(const std::filesystem::path& path);

}  // namespace fcl
