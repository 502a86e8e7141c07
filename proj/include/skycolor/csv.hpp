#pragma once

#include <filesystem>
#include <string>

namespace skycolor::csv {

// Locale-independent "%.9g" formatting; identical bytes for identical doubles.
std::string fmt(double v);

void write_file(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

}  // namespace skycolor::csv
