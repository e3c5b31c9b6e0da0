#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "medkg/text.hpp"

using namespace medkg::text;

TEST_CASE("trim and collapse") {
    CHECK(trim("  a b  ") == "a b");
    CHECK(trim("\t\n") == "");
    CHECK(collapse_ws("  a \t b\n\nc ") == "a b c");
    CHECK(collapse_ws("") == "");
}

TEST_CASE("nfc composes combining sequences") {
    // e + COMBINING ACUTE ACCENT -> U+00E9
    std::string decomposed = "Caf\x65\xcc\x81";
    std::string composed = "Caf\xc3\xa9";
    CHECK(nfc(decomposed) == composed);
    CHECK(nfc(composed) == composed);
    CHECK(cp_length(nfc(decomposed)) == 4);
}

TEST_CASE("casefold") {
    CHECK(casefold("AsPiRiN") == "aspirin");
    CHECK(casefold("Stra\xc3\x9f""e") == "strasse");  // ß folds to ss
    CHECK(fold_key("  Hello   WORLD ") == "hello world");
}

TEST_CASE("strip_diacritics") {
    CHECK(strip_diacritics("G\xc3\xb3mez") == "Gomez");
    CHECK(strip_diacritics("M\xc3\xbcller") == "Muller");
    CHECK(strip_diacritics("\xc3\xb8") == "o");   // ø has no decomposition
    CHECK(strip_diacritics("\xc5\x81\xc3\xb3d\xc5\xba") == "Lodz");
    CHECK(name_key("G\xc3\x93MEZ") == name_key("gomez"));
}

TEST_CASE("sanitize_utf8 replaces and counts invalid sequences") {
    std::string bad = "ab\xffz\xc3(";
    auto repaired = sanitize_utf8(bad);
    CHECK(repaired.replaced == 2);
    CHECK(repaired.text.find('z') != std::string::npos);
    CHECK(sanitize_utf8("plain ascii").replaced == 0);
    // a genuine replacement char in the input is not counted
    CHECK(sanitize_utf8("\xef\xbf\xbd").replaced == 0);
    // overlong encoding of '/' must be rejected
    CHECK(sanitize_utf8("\xc0\xaf").replaced > 0);
}

TEST_CASE("code point slicing") {
    std::string s = "a\xc3\xa9o\xf0\x9f\x98\x80z";  // a e-acute o emoji z
    CHECK(cp_length(s) == 5);
    CHECK(cp_substr(s, 1, 3) == "\xc3\xa9o");
    CHECK(cp_substr(s, 3, 5) == "\xf0\x9f\x98\x80z");
    CHECK(cp_substr(s, 2, 2) == "");
    CHECK(cp_substr(s, 0, 99) == s);

    CpIndex index(s);
    CHECK(index.cp_count() == 5);
    CHECK(index.slice(s, 1, 3) == "\xc3\xa9o");
    CHECK(index.slice(s, 0, 5) == s);
    CHECK(index.byte_of(5) == s.size());
}

TEST_CASE("word code points") {
    CHECK(is_word_cp(U'a'));
    CHECK(is_word_cp(U'9'));
    CHECK(is_word_cp(U'é'));
    CHECK(!is_word_cp(U' '));
    CHECK(!is_word_cp(U'-'));
}
