#include "medkg/xml.hpp"

#include <algorithm>
#include <cstring>

#include "medkg/errors.hpp"
#include "medkg/text.hpp"

namespace medkg::xml {

namespace {

bool is_ws(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r';
}

bool is_name_start(char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_' || c == ':' ||
           static_cast<unsigned char>(c) >= 0x80;
}

bool is_name_char(char c) {
    return is_name_start(c) || (c >= '0' && c <= '9') || c == '-' || c == '.';
}

}  // namespace

Reader::Reader(std::istream& in, std::size_t chunk_size) : in_(in), chunk_size_(chunk_size) {
    buf_.reserve(chunk_size_);
}

bool Reader::fill(std::size_t want) {
    while (buf_.size() - pos_ < want && !eof_in_) {
        // Drop the consumed prefix before growing; keeps the buffer bounded
        // by the largest single token plus one chunk.
        if (pos_ > chunk_size_) {
            consumed_ += pos_;
            buf_.erase(0, pos_);
            pos_ = 0;
        }
        std::size_t old = buf_.size();
        buf_.resize(old + chunk_size_);
        in_.read(buf_.data() + old, static_cast<std::streamsize>(chunk_size_));
        std::size_t got = static_cast<std::size_t>(in_.gcount());
        buf_.resize(old + got);
        if (got == 0) eof_in_ = true;
        peak_buffer_ = std::max(peak_buffer_, buf_.capacity());
    }
    return buf_.size() - pos_ >= want;
}

void Reader::fail(const std::string& msg) {
    throw ParseError("malformed XML: " + msg, byte_offset());
}

bool Reader::peek_is(std::string_view lit) {
    if (!fill(lit.size())) return false;
    return buf_.compare(pos_, lit.size(), lit) == 0;
}

void Reader::require(char c, const char* what) {
    if (!fill(1) || buf_[pos_] != c) fail(std::string("expected ") + what);
    ++pos_;
}

void Reader::skip_ws() {
    for (;;) {
        if (pos_ >= buf_.size() && !fill(1)) return;
        if (!is_ws(buf_[pos_])) return;
        ++pos_;
    }
}

std::string Reader::read_name() {
    if (!fill(1) || !is_name_start(buf_[pos_])) fail("expected name");
    std::string name;
    while (fill(1) && is_name_char(buf_[pos_])) {
        name.push_back(buf_[pos_]);
        ++pos_;
    }
    return name;
}

std::string Reader::decode_entity() {
    // caller consumed '&'
    std::string ent;
    for (;;) {
        if (!fill(1)) fail("unterminated entity reference");
        char c = buf_[pos_++];
        if (c == ';') break;
        ent.push_back(c);
        if (ent.size() > 32) fail("entity reference too long");
    }
    if (ent == "amp") return "&";
    if (ent == "lt") return "<";
    if (ent == "gt") return ">";
    if (ent == "quot") return "\"";
    if (ent == "apos") return "'";
    if (!ent.empty() && ent[0] == '#') {
        char32_t cp = 0;
        bool ok = ent.size() > 1;
        if (ent.size() > 2 && (ent[1] == 'x' || ent[1] == 'X')) {
            for (std::size_t i = 2; i < ent.size(); ++i) {
                char c = ent[i];
                std::uint32_t d;
                if (c >= '0' && c <= '9') d = static_cast<std::uint32_t>(c - '0');
                else if (c >= 'a' && c <= 'f') d = static_cast<std::uint32_t>(c - 'a' + 10);
                else if (c >= 'A' && c <= 'F') d = static_cast<std::uint32_t>(c - 'A' + 10);
                else { ok = false; break; }
                cp = cp * 16 + d;
            }
        } else {
            for (std::size_t i = 1; i < ent.size(); ++i) {
                if (ent[i] < '0' || ent[i] > '9') { ok = false; break; }
                cp = cp * 10 + static_cast<std::uint32_t>(ent[i] - '0');
            }
        }
        if (!ok || cp == 0 || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))
            fail("invalid character reference &" + ent + ";");
        std::string out;
        text::append_cp(out, cp);
        return out;
    }
    fail("unknown entity &" + ent + ";");
}

void Reader::skip_comment() {
    // after "<!--"
    for (;;) {
        if (!fill(3)) fail("unterminated comment");
        if (buf_.compare(pos_, 3, "-->") == 0) {
            pos_ += 3;
            return;
        }
        ++pos_;
    }
}

void Reader::skip_pi() {
    // after "<?"
    for (;;) {
        if (!fill(2)) fail("unterminated processing instruction");
        if (buf_.compare(pos_, 2, "?>") == 0) {
            pos_ += 2;
            return;
        }
        ++pos_;
    }
}

void Reader::skip_doctype() {
    // after "<!DOCTYPE"; tolerate an internal subset in brackets
    int bracket = 0;
    for (;;) {
        if (!fill(1)) fail("unterminated DOCTYPE");
        char c = buf_[pos_++];
        if (c == '[') ++bracket;
        else if (c == ']') --bracket;
        else if (c == '>' && bracket <= 0) return;
    }
}

void Reader::parse_cdata() {
    // after "<![CDATA["
    event_.type = EventType::Text;
    event_.text.clear();
    for (;;) {
        if (!fill(3)) fail("unterminated CDATA section");
        if (buf_.compare(pos_, 3, "]]>") == 0) {
            pos_ += 3;
            return;
        }
        event_.text.push_back(buf_[pos_++]);
    }
}

void Reader::parse_markup() {
    // caller consumed '<'
    if (!fill(1)) fail("unterminated markup");
    char c = buf_[pos_];
    if (c == '?') {
        ++pos_;
        skip_pi();
        event_.type = EventType::Text;
        event_.text.clear();  // empty text event; next() loops
        return;
    }
    if (c == '!') {
        if (peek_is("!--")) {
            pos_ += 3;
            skip_comment();
            event_.type = EventType::Text;
            event_.text.clear();
            return;
        }
        if (peek_is("![CDATA[")) {
            pos_ += 8;
            parse_cdata();
            return;
        }
        if (peek_is("!DOCTYPE")) {
            pos_ += 8;
            skip_doctype();
            event_.type = EventType::Text;
            event_.text.clear();
            return;
        }
        fail("unsupported declaration");
    }
    if (c == '/') {
        ++pos_;
        std::string name = read_name();
        skip_ws();
        require('>', "'>'");
        if (open_.empty() || open_.back() != name)
            fail("mismatched end tag </" + name + ">");
        open_.pop_back();
        event_.type = EventType::EndElement;
        event_.name = std::move(name);
        event_.attrs.clear();
        return;
    }
    // start tag
    std::string name = read_name();
    event_.attrs.clear();
    for (;;) {
        skip_ws();
        if (!fill(1)) fail("unterminated start tag");
        char d = buf_[pos_];
        if (d == '>') {
            ++pos_;
            open_.push_back(name);
            break;
        }
        if (d == '/') {
            ++pos_;
            require('>', "'>' after '/'");
            pending_end_ = true;
            break;
        }
        Attribute attr;
        attr.name = read_name();
        skip_ws();
        require('=', "'=' in attribute");
        skip_ws();
        if (!fill(1)) fail("unterminated attribute");
        char q = buf_[pos_];
        if (q != '"' && q != '\'') fail("attribute value must be quoted");
        ++pos_;
        for (;;) {
            if (!fill(1)) fail("unterminated attribute value");
            char v = buf_[pos_];
            if (v == q) {
                ++pos_;
                break;
            }
            if (v == '<') fail("'<' in attribute value");
            if (v == '&') {
                ++pos_;
                attr.value += decode_entity();
            } else {
                attr.value.push_back(v);
                ++pos_;
            }
        }
        event_.attrs.push_back(std::move(attr));
    }
    event_.type = EventType::StartElement;
    event_.name = std::move(name);
}

void Reader::parse_text() {
    event_.type = EventType::Text;
    event_.text.clear();
    while (event_.text.size() < chunk_size_) {
        if (!fill(1)) return;
        char c = buf_[pos_];
        if (c == '<') return;
        if (c == '&') {
            ++pos_;
            event_.text += decode_entity();
        } else {
            event_.text.push_back(c);
            ++pos_;
        }
    }
}

const Event& Reader::next() {
    for (;;) {
        if (done_) {
            event_ = Event{};
            return event_;
        }
        if (pending_end_) {
            pending_end_ = false;
            event_.type = EventType::EndElement;
            event_.attrs.clear();
            // event_.name still holds the element name from the start tag
            return event_;
        }
        if (!fill(1)) {
            if (!open_.empty()) fail("unexpected end of input inside <" + open_.back() + ">");
            done_ = true;
            event_ = Event{};
            return event_;
        }
        if (buf_[pos_] == '<') {
            ++pos_;
            parse_markup();
            if (event_.type == EventType::Text && event_.text.empty()) continue;  // skipped markup
            return event_;
        }
        parse_text();
        if (event_.text.empty()) continue;
        return event_;
    }
}

}  // namespace medkg::xml
