#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

// Comma-separated reading/writing. The writer emits the exact byte format
// the output tables are specified in: UTF-8, LF line endings, minimal
// double-quote escaping (a field is quoted iff it contains a comma, quote,
// CR or LF; embedded quotes are doubled). The reader accepts that format
// plus CRLF input.
namespace medkg::csv {

using Row = std::vector<std::string>;

std::string escape_field(std::string_view field);

// One line, terminated with '\n'.
std::string format_row(const Row& row);

void write_rows(std::ostream& out, const std::vector<Row>& rows);

// Parses a whole document. Throws ParseError (1-based line numbers) on
// unterminated quotes or garbage after a closing quote.
std::vector<Row> parse(std::string_view data);

std::vector<Row> read_file(const std::string& path);
void write_file(const std::string& path, const std::vector<Row>& rows);

}  // namespace medkg::csv
