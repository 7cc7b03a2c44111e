#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace failsafe {

// Base class for everything this library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A documented precondition was violated by the caller (mismatched orders,
// dimensions, shifts that do not bound the column degrees, ...).
class ContractViolation : public Error {
public:
    using Error::Error;
};

// A truncated polynomial with zero constant term was asked for its inverse.
class NotAUnit : public Error {
public:
    using Error::Error;
};

// A polynomial matrix whose constant-term matrix is singular.
class NotInvertible : public Error {
public:
    using Error::Error;
};

// Determinant elimination found no unit pivot.
class DetNotUnit : public Error {
public:
    using Error::Error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class InvalidQuery : public Error {
public:
    using Error::Error;
};

}  // namespace failsafe
