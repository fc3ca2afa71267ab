#pragma once

#include <stdexcept>
#include <string>

namespace evoc {

/// Base class of every error thrown by the toolkit.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed input data; the message carries file/line context when available.
class ParseError : public Error {
public:
    using Error::Error;
    ParseError(const std::string& file, std::size_t line, const std::string& msg)
        : Error(file + ":" + std::to_string(line) + ": " + msg) {}
};

/// A contract or invariant violation (bad arguments, inconsistent state).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A lookup failed: unknown descriptor, language, file, registry entry.
class NotFoundError : public Error {
public:
    using Error::Error;
};

}  // namespace evoc
