#pragma once

#include <stdexcept>
#include <string>

namespace khattat {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class GeometryError : public Error {
public:
    using Error::Error;
};

class FontError : public Error {
public:
    using Error::Error;
};

/// A codepoint the font has no glyph for.
class MissingGlyphError : public FontError {
public:
    MissingGlyphError(char32_t codepoint, const std::string& what)
        : FontError(what), codepoint_(codepoint) {}
    char32_t codepoint() const noexcept { return codepoint_; }

private:
    char32_t codepoint_;
};

class ImageError : public Error {
public:
    using Error::Error;
};

/// Failure talking to a guidance service. `retriable()` is true for
/// transport-level problems and false for protocol-level ones.
class ScorerError : public Error {
public:
    enum class Kind { transport, timeout, malformed, server, usage };

    ScorerError(Kind kind, const std::string& what)
        : Error(what), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }
    bool retriable() const noexcept {
        return kind_ == Kind::transport || kind_ == Kind::timeout;
    }

private:
    Kind kind_;
};

class PromptError : public Error {
public:
    PromptError(const std::string& what, std::string raw_response)
        : Error(what), raw_(std::move(raw_response)) {}
    const std::string& raw_response() const noexcept { return raw_; }

private:
    std::string raw_;
};

class SelectionError : public Error {
public:
    using Error::Error;
};

class OptimizerError : public Error {
public:
    using Error::Error;
};

}  // namespace khattat
