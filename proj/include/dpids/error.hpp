// Exception types shared across the library.
#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace dpids {

// Base class for every error raised by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Signed overflow in checked integer / fixed-point arithmetic.
class ArithmeticOverflow : public Error {
public:
    using Error::Error;
};

// Register or table index outside the addressable range.
class IndexError : public Error {
public:
    using Error::Error;
};

// Invalid argument value (bad modulus, empty input, out-of-range knob).
class ArgumentError : public Error {
public:
    using Error::Error;
};

// Operation invoked in a state that does not permit it.
class StateError : public Error {
public:
    using Error::Error;
};

// Malformed binary or text input (bad magic, bad field).
class FormatError : public Error {
public:
    using Error::Error;
};

// Input shorter or longer than its declared layout.
class LengthError : public Error {
public:
    using Error::Error;
};

// Unsupported format version.
class VersionError : public Error {
public:
    using Error::Error;
};

// Timestamps not non-decreasing in a packet stream.
class TraceOrderError : public Error {
public:
    using Error::Error;
};

// Text input that fails to parse; carries the 1-based line number.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::size_t line)
        : Error(msg + " (line " + std::to_string(line) + ")"), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// Decision-tree path with an empty feature range.
class CompileError : public Error {
public:
    using Error::Error;
};

// Violated internal invariant; always a bug, never defaulted away.
class InternalError : public Error {
public:
    using Error::Error;
};

// Per-packet primitive-operation budget exceeded.
class BudgetViolation : public Error {
public:
    BudgetViolation(const std::string& msg, std::uint64_t ops)
        : Error(msg), ops_(ops) {}
    std::uint64_t ops_used() const { return ops_; }

private:
    std::uint64_t ops_;
};

// Invalid experiment configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Filesystem failure; message names the path.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace dpids
