#pragma once

#include <string>
#include <vector>

namespace stylespace {

// Reads a whole file; throws ParseError if the file cannot be opened.
std::string read_file(const std::string& path);

// Write-temp-then-rename so re-runs replace outputs atomically.
void atomic_write(const std::string& path, const std::string& content);

// Minimal RFC-style CSV: fields containing comma, quote or newline are quoted,
// embedded quotes doubled.
std::string csv_escape(const std::string& field);
std::vector<std::string> csv_split(const std::string& line);

// Shortest round-trip decimal form, stable across runs.
std::string format_double(double x);

}  // namespace stylespace
