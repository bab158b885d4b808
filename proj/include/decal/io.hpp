#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace decal::io {

/// Shortest-safe decimal rendering with 17 significant digits.
std::string format_double(double value);

/// Parses a full field as a finite or infinite double; throws ParseError with `line`.
double parse_double(std::string_view field, std::size_t line);

std::vector<std::string> split_csv(std::string_view line);

/// Reads a text file; transparently decompresses paths ending in ".gz".
std::string read_text(const std::filesystem::path& path);

/// Splits text into lines, dropping '\r' and a trailing empty line.
std::vector<std::string> lines(const std::string& text);

/// Writes to a sibling temporary file and renames it into place.
void write_atomic(const std::filesystem::path& path, const std::string& content);

} // namespace decal::io
