#pragma once

#include <stdexcept>
#include <string>

namespace mabs {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent model specification (bad ranges, unknown names, ...).
class SpecError : public Error {
public:
    using Error::Error;
};

/// Syntax error in expression text or in one of the file formats.
class ParseError : public Error {
public:
    using Error::Error;
};

/// The input uses a modeling feature outside the supported subset (clocks, arrays, ...).
class UnsupportedFeature : public Error {
public:
    using Error::Error;
};

/// Runtime failure while evaluating an expression: division by zero, 16-bit overflow,
/// unbound name.
class EvalError : public Error {
public:
    using Error::Error;
};

/// Structural problem in a domain or config file.
class FormatError : public Error {
public:
    using Error::Error;
};

/// A configured resource cap (vectors, states) was exceeded.
class ResourceError : public Error {
public:
    using Error::Error;
};

} // namespace mabs
