#pragma once

#include <string>
#include <vector>

namespace cpgait::csv {

/// Shortest text that reads back to the same double.
std::string num(double x);

/// Writes `content` to `path` through a temporary file and a rename, so
/// concurrent readers never see a partial file. Throws std::runtime_error.
void write_atomic(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

/// Splits one CSV line on commas (no quoting; our files never need it).
std::vector<std::string> split(const std::string& line);

}  // namespace cpgait::csv
