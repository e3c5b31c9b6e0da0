#include "medkg/csv.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include "medkg/errors.hpp"

namespace medkg::csv {

namespace {

bool needs_quotes(std::string_view f) {
    return f.find_first_of(",\"\r\n") != std::string_view::npos;
}

}  // namespace

std::string escape_field(std::string_view field) {
    if (!needs_quotes(field)) return std::string(field);
    std::string out;
    out.reserve(field.size() + 2);
    out.push_back('"');
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string format_row(const Row& row) {
    std::string out;
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out.push_back(',');
        out += escape_field(row[i]);
    }
    out.push_back('\n');
    return out;
}

void write_rows(std::ostream& out, const std::vector<Row>& rows) {
    for (const Row& r : rows) out << format_row(r);
}

std::vector<Row> parse(std::string_view data) {
    std::vector<Row> rows;
    Row row;
    std::string field;
    std::uint64_t line = 1;
    bool in_quotes = false;
    bool field_was_quoted = false;
    bool any_char = false;  // current line has content (distinguishes trailing newline)

    auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
        field_was_quoted = false;
    };
    auto end_row = [&] {
        end_field();
        rows.push_back(std::move(row));
        row.clear();
        any_char = false;
    };

    for (std::size_t i = 0; i < data.size(); ++i) {
        char c = data[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < data.size() && data[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line;
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"':
                if (!field.empty() || field_was_quoted)
                    throw ParseError("quote inside unquoted field", line,
                                     ParseError::Unit::LineNumber);
                in_quotes = true;
                field_was_quoted = true;
                any_char = true;
                break;
            case ',':
                end_field();
                any_char = true;
                break;
            case '\r':
                // only as part of CRLF
                if (i + 1 >= data.size() || data[i + 1] != '\n')
                    throw ParseError("stray carriage return", line, ParseError::Unit::LineNumber);
                break;
            case '\n':
                end_row();
                ++line;
                break;
            default:
                if (field_was_quoted)
                    throw ParseError("data after closing quote", line,
                                     ParseError::Unit::LineNumber);
                field.push_back(c);
                any_char = true;
                break;
        }
    }
    if (in_quotes) throw ParseError("unterminated quoted field", line, ParseError::Unit::LineNumber);
    if (any_char || !field.empty() || !row.empty()) end_row();
    return rows;
}

std::vector<Row> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

void write_file(const std::string& path, const std::vector<Row>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open file for writing: " + path);
    write_rows(out, rows);
    if (!out) throw Error("write failed: " + path);
}

}  // namespace medkg::csv
