#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <string>
#include <vector>

// Pull parser for the citation XML element subset: elements, attributes,
// character data, CDATA, comments, processing instructions, DOCTYPE, and
// the five predefined entities plus numeric character references. It never
// buffers more than one tag or one text chunk, so memory stays bounded by
// the largest single token regardless of document size. Structural errors
// throw ParseError carrying the byte offset.
namespace medkg::xml {

struct Attribute {
    std::string name;
    std::string value;
};

enum class EventType {
    StartElement,  // name + attrs valid
    EndElement,    // name valid (self-closing tags produce both events)
    Text,          // text valid; long runs may arrive as several chunks
    EndOfDocument,
};

struct Event {
    EventType type = EventType::EndOfDocument;
    std::string name;
    std::vector<Attribute> attrs;
    std::string text;

    const std::string* attr(std::string_view key) const {
        for (const auto& a : attrs)
            if (a.name == key) return &a.value;
        return nullptr;
    }
};

class Reader {
public:
    explicit Reader(std::istream& in, std::size_t chunk_size = 1 << 16);

    // Next event; EndOfDocument is sticky. Whitespace-only text between
    // elements is reported too; callers decide what to keep.
    const Event& next();

    // Byte offset of the first unconsumed input byte.
    std::uint64_t byte_offset() const { return consumed_ + pos_; }

    // High-water mark of the internal buffer; stays O(largest token).
    std::size_t peak_buffer_bytes() const { return peak_buffer_; }

private:
    bool fill(std::size_t want);
    bool peek_is(std::string_view lit);
    void require(char c, const char* what);
    void skip_ws();
    std::string read_name();
    void parse_markup();        // after '<'
    void parse_text();
    void skip_comment();
    void skip_pi();
    void skip_doctype();
    void parse_cdata();
    std::string decode_entity();  // after '&'
    [[noreturn]] void fail(const std::string& msg);

    std::istream& in_;
    std::string buf_;
    std::size_t pos_ = 0;
    std::uint64_t consumed_ = 0;
    std::size_t chunk_size_;
    std::size_t peak_buffer_ = 0;
    bool eof_in_ = false;
    bool done_ = false;
    Event event_;
    std::vector<std::string> open_;  // element stack, for well-formedness
    bool pending_end_ = false;       // self-closing: emit EndElement next
};

}  // namespace medkg::xml
