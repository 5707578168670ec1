#pragma once

#include <stdexcept>
#include <string>

namespace cdl
{

// Error categories map one-to-one onto CLI exit codes (see tools/main.cpp).

class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
    virtual const char* kind() const noexcept { return "error"; }
};

// Malformed input text (edge lists, partitions, manifests).
class ParseError : public Error
{
public:
    ParseError(const std::string& msg, std::size_t line)
        : Error("line " + std::to_string(line) + ": " + msg), _line(line) {}
    std::size_t line() const noexcept { return _line; }
    const char* kind() const noexcept override { return "parse"; }
private:
    std::size_t _line;
};

// Well-formed input that violates a model invariant (self-loops, label out
// of range, size mismatch, ...).
class ValidationError : public Error
{
public:
    using Error::Error;
    const char* kind() const noexcept override { return "validation"; }
};

// Argument outside the mathematical domain of a function.
class DomainError : public Error
{
public:
    using Error::Error;
    const char* kind() const noexcept override { return "domain"; }
};

// Objective undefined (e.g. E = 0), empty grids, bracketing failures.
class NumericError : public Error
{
public:
    using Error::Error;
    const char* kind() const noexcept override { return "numeric"; }
};

// A requested state cannot be realized (pair exhaustion, W outside range).
class InfeasibleError : public Error
{
public:
    using Error::Error;
    const char* kind() const noexcept override { return "infeasible"; }
};

} // namespace cdl
