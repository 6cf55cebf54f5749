#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace grassdisagg::csv {

/// Splits one CSV line on commas. Surrounding double quotes on a field are
/// stripped; embedded commas inside quotes are not supported.
std::vector<std::string_view> split(std::string_view line);

/// Trims ASCII whitespace and a trailing '\r'.
std::string_view trim(std::string_view s);

/// Strict full-field parse; false on garbage, trailing characters or non-finite values.
bool parse_double(std::string_view field, double& out);
bool parse_int(std::string_view field, long long& out);

/// Shortest representation that parses back to the identical double.
std::string format_double(double value);

}  // namespace grassdisagg::csv
