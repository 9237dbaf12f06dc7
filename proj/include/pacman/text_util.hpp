#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace pacman {

// Shortest representation that round-trips exactly.
std::string format_double(double x);
double parse_double(std::string_view s);  // throws std::invalid_argument

std::string_view trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

}  // namespace pacman
