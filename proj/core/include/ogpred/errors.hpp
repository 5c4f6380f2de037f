#pragma once

#include <stdexcept>
#include <string>

namespace ogpred {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Tensor shapes incompatible with the requested operation.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Operand outside the numeric domain of an operation (log of non-positive
/// value, division by a value inside the guard band, ...).
class NumericDomainError : public Error {
public:
    using Error::Error;
};

/// Slice or index outside the addressed region.
class BoundsError : public Error {
public:
    using Error::Error;
};

/// An API precondition was violated by the caller.
class ContractError : public Error {
public:
    using Error::Error;
};

/// Invalid or inconsistent configuration (model/run config, file headers).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed input file contents.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Filesystem-level failure (missing file, short read, write failure).
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace ogpred
