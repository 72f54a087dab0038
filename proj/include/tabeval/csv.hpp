#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace tabeval::csv {

// RFC-4180 style quoting: fields containing comma, quote or newline are
// wrapped in double quotes with embedded quotes doubled.
std::string escape_field(std::string_view field);
std::string join_row(const std::vector<std::string>& fields);

// Splits one CSV document into rows of fields, honoring quoted fields with
// embedded commas/newlines. Keeps empty trailing fields.
std::vector<std::vector<std::string>> parse(std::string_view text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace tabeval::csv
