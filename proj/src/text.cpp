#include "medkg/text.hpp"

#include <unicode/uchar.h>
#include <unicode/unorm2.h>
#include <unicode/ustring.h>

#include <array>
#include <cstring>
#include <stdexcept>
#include <utility>

namespace medkg::text {

namespace {

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// UTF-8 -> UTF-16 -> op -> UTF-8 round trip for the ICU C API.
std::u16string to_utf16(std::string_view s) {
    std::u16string out(s.size() + 1, u'\0');
    UErrorCode status = U_ZERO_ERROR;
    int32_t len = 0;
    u_strFromUTF8(out.data(), static_cast<int32_t>(out.size()), &len, s.data(),
                  static_cast<int32_t>(s.size()), &status);
    if (U_FAILURE(status)) {
        // Callers sanitize first; treat residual failures as data to repair.
        auto repaired = sanitize_utf8(s);
        status = U_ZERO_ERROR;
        out.assign(repaired.text.size() + 1, u'\0');
        u_strFromUTF8(out.data(), static_cast<int32_t>(out.size()), &len, repaired.text.data(),
                      static_cast<int32_t>(repaired.text.size()), &status);
        if (U_FAILURE(status)) return {};
    }
    out.resize(static_cast<std::size_t>(len));
    return out;
}

std::string to_utf8(const std::u16string& s) {
    std::string out(s.size() * 3 + 1, '\0');
    UErrorCode status = U_ZERO_ERROR;
    int32_t len = 0;
    u_strToUTF8(out.data(), static_cast<int32_t>(out.size()), &len, s.data(),
                static_cast<int32_t>(s.size()), &status);
    if (status == U_BUFFER_OVERFLOW_ERROR) {
        status = U_ZERO_ERROR;
        out.assign(static_cast<std::size_t>(len) + 1, '\0');
        u_strToUTF8(out.data(), static_cast<int32_t>(out.size()), &len, s.data(),
                    static_cast<int32_t>(s.size()), &status);
    }
    if (U_FAILURE(status)) return {};
    out.resize(static_cast<std::size_t>(len));
    return out;
}

std::u16string normalize16(const UNormalizer2* norm, const std::u16string& in) {
    UErrorCode status = U_ZERO_ERROR;
    std::u16string out(in.size() * 2 + 8, u'\0');
    int32_t len = unorm2_normalize(norm, in.data(), static_cast<int32_t>(in.size()), out.data(),
                                   static_cast<int32_t>(out.size()), &status);
    if (status == U_BUFFER_OVERFLOW_ERROR) {
        status = U_ZERO_ERROR;
        out.assign(static_cast<std::size_t>(len), u'\0');
        len = unorm2_normalize(norm, in.data(), static_cast<int32_t>(in.size()), out.data(),
                               static_cast<int32_t>(out.size()), &status);
    }
    if (U_FAILURE(status)) return in;
    out.resize(static_cast<std::size_t>(len));
    return out;
}

const UNormalizer2* nfc_instance() {
    UErrorCode status = U_ZERO_ERROR;
    const UNormalizer2* n = unorm2_getNFCInstance(&status);
    if (U_FAILURE(status)) throw std::runtime_error("ICU NFC normalizer unavailable");
    return n;
}

const UNormalizer2* nfd_instance() {
    UErrorCode status = U_ZERO_ERROR;
    const UNormalizer2* n = unorm2_getNFDInstance(&status);
    if (U_FAILURE(status)) throw std::runtime_error("ICU NFD normalizer unavailable");
    return n;
}

// Latin letters that do not decompose to base + mark.
std::string_view ascii_fallback(char32_t cp) {
    switch (cp) {
        case U'ß': return "ss";
        case U'ẞ': return "SS";
        case U'ø': return "o";
        case U'Ø': return "O";
        case U'ł': return "l";
        case U'Ł': return "L";
        case U'đ': return "d";
        case U'Đ': return "D";
        case U'ð': return "d";
        case U'Ð': return "D";
        case U'þ': return "th";
        case U'Þ': return "Th";
        case U'æ': return "ae";
        case U'Æ': return "AE";
        case U'œ': return "oe";
        case U'Œ': return "OE";
        case U'ı': return "i";
        case U'ƒ': return "f";
        default: return {};
    }
}

}  // namespace

std::string_view trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return s.substr(b, e - b);
}

std::string collapse_ws(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool in_ws = false;
    for (char c : trim(s)) {
        if (is_space(c)) {
            in_ws = true;
            continue;
        }
        if (in_ws) out.push_back(' ');
        in_ws = false;
        out.push_back(c);
    }
    return out;
}

std::string nfc(std::string_view s) {
    if (s.empty()) return {};
    return to_utf8(normalize16(nfc_instance(), to_utf16(s)));
}

std::string casefold(std::string_view s) {
    if (s.empty()) return {};
    std::u16string in = to_utf16(s);
    UErrorCode status = U_ZERO_ERROR;
    std::u16string out(in.size() * 2 + 8, u'\0');
    int32_t len = u_strFoldCase(out.data(), static_cast<int32_t>(out.size()), in.data(),
                                static_cast<int32_t>(in.size()), U_FOLD_CASE_DEFAULT, &status);
    if (status == U_BUFFER_OVERFLOW_ERROR) {
        status = U_ZERO_ERROR;
        out.assign(static_cast<std::size_t>(len), u'\0');
        len = u_strFoldCase(out.data(), static_cast<int32_t>(out.size()), in.data(),
                            static_cast<int32_t>(in.size()), U_FOLD_CASE_DEFAULT, &status);
    }
    if (U_FAILURE(status)) return std::string(s);
    out.resize(static_cast<std::size_t>(len));
    return to_utf8(out);
}

std::string fold_key(std::string_view s) {
    return collapse_ws(casefold(nfc(s)));
}

std::string strip_diacritics(std::string_view s) {
    std::u16string nfd = normalize16(nfd_instance(), to_utf16(s));
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < nfd.size();) {
        UChar32 cp;
        {
            int32_t idx = static_cast<int32_t>(i);
            U16_NEXT(nfd.data(), idx, static_cast<int32_t>(nfd.size()), cp);
            i = static_cast<std::size_t>(idx);
        }
        if (u_charType(cp) == U_NON_SPACING_MARK) continue;
        std::string_view fb = ascii_fallback(static_cast<char32_t>(cp));
        if (!fb.empty()) {
            out.append(fb);
        } else {
            append_cp(out, static_cast<char32_t>(cp));
        }
    }
    return out;
}

std::string name_key(std::string_view s) {
    return collapse_ws(strip_diacritics(casefold(s)));
}

Utf8Repair sanitize_utf8(std::string_view s) {
    Utf8Repair r;
    r.text.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        std::size_t start = i;
        char32_t cp = decode_cp(s, i);
        // decode_cp advances exactly one byte on failure; a genuine U+FFFD
        // in the input is three bytes long.
        if (cp == kReplacementChar && i - start == 1) {
            append_cp(r.text, kReplacementChar);
            ++r.replaced;
        } else {
            r.text.append(s.substr(start, i - start));
        }
    }
    return r;
}

char32_t decode_cp(std::string_view s, std::size_t& i) {
    const auto b = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
    unsigned char c0 = b(i);
    if (c0 < 0x80) {
        ++i;
        return c0;
    }
    std::size_t need;
    char32_t cp;
    char32_t min;
    if ((c0 & 0xE0) == 0xC0) {
        need = 1;
        cp = c0 & 0x1F;
        min = 0x80;
    } else if ((c0 & 0xF0) == 0xE0) {
        need = 2;
        cp = c0 & 0x0F;
        min = 0x800;
    } else if ((c0 & 0xF8) == 0xF0) {
        need = 3;
        cp = c0 & 0x07;
        min = 0x10000;
    } else {
        ++i;
        return kReplacementChar;
    }
    if (i + need >= s.size()) {
        ++i;
        return kReplacementChar;
    }
    for (std::size_t k = 1; k <= need; ++k) {
        unsigned char cc = b(i + k);
        if ((cc & 0xC0) != 0x80) {
            ++i;
            return kReplacementChar;
        }
        cp = (cp << 6) | (cc & 0x3F);
    }
    // Overlongs, surrogates, and out-of-range values are all invalid.
    if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
        ++i;
        return kReplacementChar;
    }
    i += need + 1;
    return cp;
}

void append_cp(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

std::size_t cp_length(std::string_view s) {
    std::size_t n = 0, i = 0;
    while (i < s.size()) {
        decode_cp(s, i);
        ++n;
    }
    return n;
}

std::string cp_substr(std::string_view s, std::size_t cp_begin, std::size_t cp_end) {
    std::size_t i = 0, cp = 0, byte_begin = s.size(), byte_end = s.size();
    while (i < s.size() && cp < cp_end) {
        if (cp == cp_begin) byte_begin = i;
        decode_cp(s, i);
        ++cp;
    }
    if (cp_begin >= cp_end) return {};
    if (cp == cp_end) byte_end = i;
    if (byte_begin > byte_end) byte_begin = byte_end;
    return std::string(s.substr(byte_begin, byte_end - byte_begin));
}

CpIndex::CpIndex(std::string_view s) {
    offsets_.reserve(s.size() / 2 + 2);
    std::size_t i = 0;
    while (i < s.size()) {
        offsets_.push_back(static_cast<std::uint32_t>(i));
        decode_cp(s, i);
    }
    offsets_.push_back(static_cast<std::uint32_t>(s.size()));
}

std::string_view CpIndex::slice(std::string_view s, std::size_t cp_begin, std::size_t cp_end) const {
    std::size_t b = byte_of(cp_begin);
    std::size_t e = byte_of(cp_end);
    return s.substr(b, e - b);
}

bool is_word_cp(char32_t cp) {
    if (cp < 0x80) {
        return (cp >= '0' && cp <= '9') || (cp >= 'A' && cp <= 'Z') || (cp >= 'a' && cp <= 'z');
    }
    return u_isalnum(static_cast<UChar32>(cp)) ||
           u_charType(static_cast<UChar32>(cp)) == U_NON_SPACING_MARK;
}

bool iequals_ascii(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        char x = a[i], y = b[i];
        if (x >= 'A' && x <= 'Z') x += 32;
        if (y >= 'A' && y <= 'Z') y += 32;
        if (x != y) return false;
    }
    return true;
}

std::string lower_ascii(std::string_view s) {
    std::string out(s);
    for (char& c : out)
        if (c >= 'A' && c <= 'Z') c += 32;
    return out;
}

}  // namespace medkg::text
