#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ledmaint {

/// Malformed or unreadable input file. The message names the file, line and
/// field at fault.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace csv {

std::vector<std::string> split(std::string_view line, char delim = ',');

std::string trim(std::string_view s);

/// Parses a double; on failure throws FormatError mentioning `what`.
double to_double(std::string_view token, std::string_view what);

long long to_int(std::string_view token, std::string_view what);

/// Shortest round-trip decimal representation.
std::string format(double v);

std::vector<std::string> read_lines(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over `path`.
void write_atomic(const std::filesystem::path& path, std::string_view content);

} // namespace csv
} // namespace ledmaint
