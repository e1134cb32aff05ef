#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace offsetmodel::csv {

// Shortest representation that round-trips exactly through parse_double.
std::string format_double(double v);

// Locale-independent; throws IoError with `context` on failure.
double parse_double(std::string_view field, const std::string& context);
long parse_long(std::string_view field, const std::string& context);

std::vector<std::string_view> split_fields(std::string_view line);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

} // namespace offsetmodel::csv
