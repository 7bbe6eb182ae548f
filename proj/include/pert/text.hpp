#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pert::text {

std::vector<std::string_view> split(std::string_view s, char sep);

/// Splits on runs of spaces and tabs; no empty fields.
std::vector<std::string_view> split_ws(std::string_view s);

std::string_view trim(std::string_view s);

/// Fixed-point rendering with `decimals` digits after the point.
std::string fixed(double value, int decimals);

/// Shortest decimal string that parses back to exactly `value`.
std::string shortest(double value);

std::optional<double> parse_double(std::string_view s);
std::optional<unsigned long long> parse_unsigned(std::string_view s);

}  // namespace pert::text
