#pragma once

#include <stdexcept>
#include <string>

namespace lgae {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Matrix/vector dimension disagreements.
class ShapeError : public Error {
public:
    using Error::Error;
};

// A documented precondition or invariant was violated by the caller.
class ContractError : public Error {
public:
    using Error::Error;
};

// Dataset structure is invalid (bad edge endpoints, self-loops, ...).
class MalformedDataError : public Error {
public:
    using Error::Error;
};

// Unparseable input text; message carries the line number.
class ParseError : public Error {
public:
    using Error::Error;
};

// An index referred to a node outside the declared range.
class RangeError : public Error {
public:
    using Error::Error;
};

// Stored content does not match its recorded digest.
class IntegrityError : public Error {
public:
    using Error::Error;
};

// Invalid model/run configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Non-finite value produced where the contract requires finite ones.
class NumericError : public Error {
public:
    using Error::Error;
};

// Graph has no usable structure for the requested operation.
class DegenerateGraphError : public Error {
public:
    using Error::Error;
};

// Rejection sampling exhausted its attempt budget.
class SamplingError : public Error {
public:
    using Error::Error;
};

// Filesystem read/write failure.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace lgae
