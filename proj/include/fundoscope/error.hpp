#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace fundoscope {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File could not be opened, read or written.
class IoError : public Error {
public:
    using Error::Error;
};

/// Image bytes do not follow a supported encoding.
class FormatError : public Error {
public:
    using Error::Error;
};

/// A precondition of an operation was violated (sizes, dimensions, step params).
class ContractError : public Error {
public:
    using Error::Error;
};

/// A named parameter is outside its declared range.
class RangeError : public ContractError {
public:
    RangeError(std::string param, const std::string& what)
        : ContractError(what), param_(std::move(param)) {}

    const std::string& param() const noexcept { return param_; }

private:
    std::string param_;
};

/// Syntax error in pipeline text, annotated with a 1-based line and column.
class ParseError : public Error {
public:
    ParseError(std::size_t line, std::size_t column, const std::string& msg)
        : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + msg),
          line_(line), column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/// Named lookup (preset, step kind) failed.
class LookupError : public Error {
public:
    using Error::Error;
};

}  // namespace fundoscope
