#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "medkg/csv.hpp"
#include "medkg/errors.hpp"

using namespace medkg;

TEST_CASE("escape rules") {
    CHECK(csv::escape_field("plain") == "plain");
    CHECK(csv::escape_field("Smith, J") == "\"Smith, J\"");
    CHECK(csv::escape_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(csv::escape_field("line\nbreak") == "\"line\nbreak\"");
    CHECK(csv::escape_field("") == "");
}

TEST_CASE("format and parse round trip") {
    std::vector<csv::Row> rows = {
        {"a", "b,c", "d\"e"},
        {"", "multi\nline", "x"},
        {"only"},
    };
    std::string bytes;
    for (const auto& r : rows) bytes += csv::format_row(r);
    CHECK(csv::parse(bytes) == rows);
}

TEST_CASE("parse accepts CRLF and missing final newline") {
    auto rows = csv::parse("a,b\r\nc,d");
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] == csv::Row{"a", "b"});
    CHECK(rows[1] == csv::Row{"c", "d"});
}

TEST_CASE("parse reports malformed input with line numbers") {
    CHECK_THROWS_AS(csv::parse("a,\"unterminated"), ParseError);
    CHECK_THROWS_AS(csv::parse("a,\"x\"y,b"), ParseError);
    CHECK_THROWS_AS(csv::parse("a,b\"c"), ParseError);
    try {
        csv::parse("ok,row\nbad,\"x\"y\n");
    } catch (const ParseError& e) {
        CHECK(e.offset() == 2);
        CHECK(e.unit() == ParseError::Unit::LineNumber);
    }
}

TEST_CASE("quoted empty field versus absent") {
    auto rows = csv::parse("a,\"\",b\n");
    REQUIRE(rows.size() == 1);
    CHECK(rows[0] == csv::Row{"a", "", "b"});
}
