#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace itgan::csv {

// Splits one CSV record (RFC 4180 quoting, no embedded newlines).
std::vector<std::string> split_record(std::string_view line);

// Quotes a field only when it contains a comma, quote, or line break.
std::string escape(std::string_view field);

std::string join_record(const std::vector<std::string>& fields);

// Reads the next line, stripping a trailing '\r'.  Returns false at EOF.
bool read_line(std::istream& in, std::string& line);

}  // namespace itgan::csv
