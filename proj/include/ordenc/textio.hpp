#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ordenc::textio {

/// Shortest decimal string that round-trips to the same double.
std::string fmt(double value);

/// Strict parse of a full token; throws std::invalid_argument on leftovers.
double parse_double(std::string_view token);
std::uint64_t parse_uint(std::string_view token);

std::string_view trim(std::string_view text);

/// Splits on `sep`, dropping empty tokens.
std::vector<std::string_view> split(std::string_view text, char sep);

/// Values formatted with fmt() and joined by `sep`.
std::string join(std::span<const double> values, char sep);
std::string join_uint(std::span<const std::uint64_t> values, char sep);
std::string join_size(std::span<const std::size_t> values, char sep);

}  // namespace ordenc::textio
