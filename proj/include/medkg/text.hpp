#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

// Small UTF-8 / Unicode toolbox shared by every module. Normalization and
// case folding are backed by ICU; byte-level UTF-8 handling is done here so
// that invalid input can be repaired and counted instead of aborting a run.
namespace medkg::text {

inline constexpr char32_t kReplacementChar = 0xFFFD;

// Strip leading/trailing ASCII whitespace.
std::string_view trim(std::string_view s);

// Collapse internal whitespace runs to a single space; trims ends.
std::string collapse_ws(std::string_view s);

// Canonical composition (NFC). Input must be valid UTF-8.
std::string nfc(std::string_view s);

// Full Unicode case folding.
std::string casefold(std::string_view s);

// NFC + casefold + whitespace collapse. Canonical key for dictionary and
// title/journal comparisons.
std::string fold_key(std::string_view s);

// Decompose, drop combining marks, and map the common non-decomposable
// Latin letters (ø, ł, ß, æ, ...) to ASCII. Used for name matching.
std::string strip_diacritics(std::string_view s);

// casefold + strip_diacritics + collapse. The normal form for person names.
std::string name_key(std::string_view s);

struct Utf8Repair {
    std::string text;
    std::size_t replaced = 0;  // invalid sequences replaced with U+FFFD
};

// Replace ill-formed UTF-8 sequences with U+FFFD, counting replacements.
Utf8Repair sanitize_utf8(std::string_view s);

// Decode one code point starting at byte `i`; advances `i`. Returns U+FFFD
// on invalid input (and advances by one byte). Input need not be validated.
char32_t decode_cp(std::string_view s, std::size_t& i);

void append_cp(std::string& out, char32_t cp);

// Number of code points in a valid UTF-8 string.
std::size_t cp_length(std::string_view s);

// Substring by code-point offsets, end exclusive.
std::string cp_substr(std::string_view s, std::size_t cp_begin, std::size_t cp_end);

// Precomputed code-point -> byte-offset index for repeated slicing of one
// abstract. byte_of(cp_length()) == byte length.
class CpIndex {
public:
    explicit CpIndex(std::string_view s);

    std::size_t cp_count() const { return offsets_.size() - 1; }
    std::size_t byte_of(std::size_t cp) const { return offsets_.at(cp); }
    std::string_view slice(std::string_view s, std::size_t cp_begin, std::size_t cp_end) const;

private:
    std::vector<std::uint32_t> offsets_;
};

// True if the code point counts as a word character for tokenization
// (letters, digits, combining marks).
bool is_word_cp(char32_t cp);

// ASCII-only helpers used by parsers where full Unicode is irrelevant.
bool iequals_ascii(std::string_view a, std::string_view b);
std::string lower_ascii(std::string_view s);

}  // namespace medkg::text
