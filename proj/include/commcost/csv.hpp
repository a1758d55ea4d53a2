#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace commcost {

/// Plain comma-separated table: no quoting, blank lines skipped, CR stripped.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(std::istream& in);
std::vector<std::string> split_fields(std::string_view line);

/// Whole-string numeric parses; throw ParseError on trailing garbage.
double parse_double(std::string_view text);
std::uint64_t parse_uint(std::string_view text);
bool parse_bool(std::string_view text);

std::string_view trim(std::string_view s) noexcept;

}  // namespace commcost
