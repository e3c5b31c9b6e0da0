#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>
#include <vector>

#include "medkg/errors.hpp"
#include "medkg/xml.hpp"

using namespace medkg;

namespace {

struct Flat {
    std::string kind;
    std::string data;
    bool operator==(const Flat&) const = default;
};

// Consecutive text chunks are merged so chunking is invisible to checks.
std::vector<Flat> read_all(const std::string& doc) {
    std::istringstream in(doc);
    xml::Reader reader(in);
    std::vector<Flat> out;
    for (;;) {
        const xml::Event& ev = reader.next();
        if (ev.type == xml::EventType::EndOfDocument) break;
        switch (ev.type) {
            case xml::EventType::StartElement: out.push_back({"start", ev.name}); break;
            case xml::EventType::EndElement: out.push_back({"end", ev.name}); break;
            case xml::EventType::Text:
                if (!out.empty() && out.back().kind == "text") out.back().data += ev.text;
                else out.push_back({"text", ev.text});
                break;
            default: break;
        }
    }
    return out;
}

}  // namespace

TEST_CASE("element and text events") {
    auto events = read_all("<a><b x=\"1\">hi</b><c/></a>");
    std::vector<Flat> expected = {
        {"start", "a"}, {"start", "b"}, {"text", "hi"}, {"end", "b"},
        {"start", "c"}, {"end", "c"},   {"end", "a"},
    };
    CHECK(events == expected);
}

TEST_CASE("attributes") {
    std::istringstream in("<e a=\"x &amp; y\" b='2'/>");
    xml::Reader reader(in);
    const xml::Event& ev = reader.next();
    REQUIRE(ev.type == xml::EventType::StartElement);
    REQUIRE(ev.attrs.size() == 2);
    CHECK(*ev.attr("a") == "x & y");
    CHECK(*ev.attr("b") == "2");
    CHECK(ev.attr("missing") == nullptr);
}

TEST_CASE("entities and character references") {
    auto events = read_all("<t>&lt;&gt;&amp;&quot;&apos;&#65;&#x42;</t>");
    REQUIRE(events.size() == 3);
    CHECK(events[1].data == "<>&\"'AB");
}

TEST_CASE("cdata, comments, processing instructions, doctype") {
    auto events = read_all(
        "<?xml version=\"1.0\"?><!DOCTYPE r [<!ENTITY x \"y\">]><r><!-- note "
        "--><![CDATA[a<b&c]]></r>");
    std::vector<Flat> expected = {{"start", "r"}, {"text", "a<b&c"}, {"end", "r"}};
    CHECK(events == expected);
}

TEST_CASE("malformed input carries a byte offset") {
    CHECK_THROWS_AS(read_all("<a><b></a>"), ParseError);
    CHECK_THROWS_AS(read_all("<a>truncated"), ParseError);
    CHECK_THROWS_AS(read_all("<a>&bogus;</a>"), ParseError);
    try {
        read_all("<a><b></a>");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.unit() == ParseError::Unit::ByteOffset);
        CHECK(e.offset() > 0);
    }
}

TEST_CASE("large text arrives chunked but complete") {
    std::string big(200000, 'x');
    big[0] = 'y';
    auto events = read_all("<t>" + big + "</t>");
    REQUIRE(events.size() == 3);
    CHECK(events[1].data == big);
}

TEST_CASE("buffer stays bounded across many elements") {
    std::string doc = "<all>";
    for (int i = 0; i < 5000; ++i) doc += "<item>some text content here</item>";
    doc += "</all>";
    std::istringstream in(doc);
    xml::Reader reader(in, 4096);
    while (reader.next().type != xml::EventType::EndOfDocument) {
    }
    CHECK(reader.peak_buffer_bytes() < 64 * 1024);
}
