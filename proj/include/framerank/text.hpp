#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace framerank::text {

std::vector<std::string_view> split(std::string_view s, char sep);
// Splits on runs of spaces, dropping empty fields.
std::vector<std::string> split_words(std::string_view s);
std::string_view trim(std::string_view s);

// Shortest representation that parses back to the same double.
std::string shortest(double v);
// Fixed-point with `decimals` digits after the point.
std::string fixed(double v, int decimals);

// Whole-string parses; return false on any trailing garbage.
bool parse_double(std::string_view s, double& out);
bool parse_size(std::string_view s, std::size_t& out);
bool parse_int(std::string_view s, long long& out);

}  // namespace framerank::text
