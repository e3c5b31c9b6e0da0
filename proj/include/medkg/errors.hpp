#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace medkg {

// Base class for everything this library throws.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input bytes. `offset` is a byte offset for binary/XML sources
// and a 1-based line number for line-oriented sources (see `unit`).
class ParseError : public Error {
public:
    enum class Unit { ByteOffset, LineNumber };

    ParseError(const std::string& what, std::uint64_t offset, Unit unit = Unit::ByteOffset)
        : Error(what + (unit == Unit::ByteOffset ? " (byte offset " : " (line ") +
                std::to_string(offset) + ")"),
          offset_(offset), unit_(unit) {}

    std::uint64_t offset() const { return offset_; }
    Unit unit() const { return unit_; }

private:
    std::uint64_t offset_;
    Unit unit_;
};

// Well-formed input that violates a data contract (duplicate keys etc).
class IntegrityError : public Error {
public:
    IntegrityError(const std::string& what, std::uint64_t line)
        : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}

    std::uint64_t line() const { return line_; }

private:
    std::uint64_t line_;
};

// Header row does not match the named schema.
class SchemaError : public Error {
public:
    explicit SchemaError(const std::string& what) : Error(what) {}
};

// Token offsets that do not fit the text they claim to index.
class AlignmentError : public Error {
public:
    explicit AlignmentError(const std::string& what) : Error(what) {}
};

}  // namespace medkg
