#pragma once

#include <string>
#include <vector>

namespace itemnet::csv {

using Row = std::vector<std::string>;

// RFC 4180 parser: quoted fields, escaped quotes, embedded separators and
// newlines. Accepts both LF and CRLF line endings.
std::vector<Row> parse(const std::string& text);

std::vector<Row> read_file(const std::string& path);

// Quotes a field only when required (separator, quote, or newline present).
std::string escape(const std::string& field);

std::string emit(const std::vector<Row>& rows);

}  // namespace itemnet::csv
