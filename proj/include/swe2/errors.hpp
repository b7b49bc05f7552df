#pragma once

#include <stdexcept>
#include <string>

namespace swe2 {

struct ParseError : std::runtime_error {
    ParseError(const std::string& what, std::size_t line)
        : std::runtime_error(what + " (line " + std::to_string(line) + ")"), line(line) {}
    std::size_t line;
};

struct EmptyMessage : std::runtime_error {
    EmptyMessage() : std::runtime_error("empty message") {}
};

struct EmptyCorpus : std::runtime_error {
    EmptyCorpus() : std::runtime_error("empty corpus") {}
};

struct EmptyDataset : std::runtime_error {
    EmptyDataset() : std::runtime_error("empty dataset") {}
};

struct UnmappableInput : std::runtime_error {
    explicit UnmappableInput(const std::string& word)
        : std::runtime_error("no mappable character in \"" + word + "\"") {}
};

struct TooShort : std::runtime_error {
    explicit TooShort(const std::string& word)
        : std::runtime_error("word too short to manipulate: \"" + word + "\"") {}
};

struct NoEligibleChar : std::runtime_error {
    explicit NoEligibleChar(const std::string& word)
        : std::runtime_error("no confusable character in \"" + word + "\"") {}
};

struct InvalidConfig : std::runtime_error {
    explicit InvalidConfig(const std::string& what) : std::runtime_error(what) {}
};

struct ShapeMismatch : std::runtime_error {
    explicit ShapeMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct ProviderMissing : std::runtime_error {
    explicit ProviderMissing(const std::string& what) : std::runtime_error(what) {}
};

struct LengthMismatch : std::runtime_error {
    explicit LengthMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct TooSmall : std::runtime_error {
    explicit TooSmall(const std::string& what) : std::runtime_error(what) {}
};

struct Unachievable : std::runtime_error {
    explicit Unachievable(const std::string& what) : std::runtime_error(what) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace swe2
