#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace umrahguard {

/// Base class for every domain error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input record; carries the 1-based line and offending field.
class ParseError : public Error {
public:
    ParseError(std::size_t line, std::string field, const std::string& what)
        : Error("line " + std::to_string(line) + ", field '" + field + "': " + what),
          line_(line), field_(std::move(field)) {}

    std::size_t line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }

private:
    std::size_t line_;
    std::string field_;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double violation)
        : Error(what), violation_(violation) {}
    double violation() const noexcept { return violation_; }

private:
    double violation_;
};

class UnsupportedError : public Error {
public:
    using Error::Error;
};

class ModelFileError : public Error {
public:
    /// Checksum covers truncation and any other integrity failure.
    enum class Kind { Io, Checksum, UnsupportedVersion };

    ModelFileError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

}  // namespace umrahguard
