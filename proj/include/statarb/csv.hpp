#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace statarb {

using Date = std::chrono::sys_days;

std::optional<Date> parse_date(std::string_view text);
std::string format_date(Date date);

std::optional<double> parse_double(std::string_view text);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

std::vector<std::string> split_csv_line(std::string_view line);

/// Whole file as lines, with trailing '\r' stripped. Throws Io naming the path.
std::vector<std::string> read_lines(const std::filesystem::path& path);

/// Throws Io naming the path.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace statarb
