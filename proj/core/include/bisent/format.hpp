#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace bisent {

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

// Strict parsers: the whole string must be consumed. Throw DataError.
double parse_double(std::string_view text);
std::int64_t parse_int(std::string_view text);

std::vector<std::string> split(std::string_view text, char delim);
std::string_view trim(std::string_view text);

// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ull);

}  // namespace bisent
