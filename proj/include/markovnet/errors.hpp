#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace markovnet {

// Base for all library errors; the CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid argument to a library operation (coefficient out of range, bad F, ...).
class ParameterError : public Error {
public:
    using Error::Error;
};

// A loaded or computed object violates its invariants.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Malformed input file; carries the 1-based line where parsing failed.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::size_t line)
        : Error(msg + " (line " + std::to_string(line) + ")"), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// File header announces a format version this build does not understand.
class VersionError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// Tensor/layer dimensions do not chain.
class ShapeError : public Error {
public:
    using Error::Error;
};

// Numerical integration failed its accuracy contract (trace drift).
class IntegrationError : public Error {
public:
    using Error::Error;
};

// Training loss became non-finite; carries the epoch index.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& msg, int epoch)
        : Error(msg + " (epoch " + std::to_string(epoch) + ")"), epoch_(epoch) {}
    int epoch() const { return epoch_; }

private:
    int epoch_;
};

// Transfer matrix not invertible at some grid point.
class NonInvertibleError : public Error {
public:
    using Error::Error;
};

// Recovered generator fails a consistency check (non-Hermitian decoherence matrix).
class InconsistencyError : public Error {
public:
    using Error::Error;
};

}  // namespace markovnet
