#pragma once

#include <stdexcept>
#include <string>

namespace flopdt {

/// Base class for every error this library raises deliberately.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A size or order limit was exceeded (for example the cyclotomic order cap).
struct CapacityError : Error {
    using Error::Error;
};

/// The operation is mathematically undefined for the given value
/// (division by zero, inverse of a non-unit, ...).
struct DomainError : Error {
    using Error::Error;
};

/// The caller combined incompatible objects or passed arguments outside
/// the documented contract.
struct UsageError : Error {
    using Error::Error;
};

/// A series expansion was requested in a grading chamber where it does not
/// converge (some factor carries a non-positively graded term).
struct ChamberError : Error {
    using Error::Error;
};

/// A coefficient beyond the tracked validity bound was requested.
struct PrecisionError : Error {
    using Error::Error;
};

/// Malformed input text (config files, serialized series).
struct ParseError : Error {
    using Error::Error;
};

} // namespace flopdt
