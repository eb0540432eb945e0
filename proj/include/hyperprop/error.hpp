#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hyperprop {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed expression source. `offset()` is the byte offset of the fault.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : Error(what + " at byte " + std::to_string(offset)), offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Expression evaluated outside its domain (log of non-positive, 1/0, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// The problem data violates a structural requirement (speed sign,
/// homogeneity, compatibility, nilpotency, ...).
class InvalidSpec : public Error {
public:
    using Error::Error;
};

/// Initial or target data violates the zero-order compatibility condition
/// u_out(0) = h(0, u_in(0)) beyond tolerance.
class IncompatibleData : public Error {
public:
    using Error::Error;
};

/// A numerical procedure did not reach its stopping criterion.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

} // namespace hyperprop
