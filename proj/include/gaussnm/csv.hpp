#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace gaussnm::csv {

/// "%.12g" with '.' as decimal separator regardless of locale.
std::string number(double value);

/// RFC 4180 field quoting: wrap in quotes when the field holds a comma, quote or newline.
std::string field(std::string_view text);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

/// Splits one CSV record, honouring quoted fields.
std::vector<std::string> parse_row(std::string_view line);

}  // namespace gaussnm::csv
