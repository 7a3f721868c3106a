#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace webrl::util {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
std::vector<std::string> split_lines(std::string_view text);

// Splits on runs of spaces/tabs, dropping empty fields.
std::vector<std::string> split_fields(std::string_view line);

bool iequals(std::string_view a, std::string_view b);

}  // namespace webrl::util
