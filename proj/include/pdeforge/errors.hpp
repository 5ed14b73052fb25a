#pragma once

#include <stdexcept>
#include <string>

namespace pdeforge {

/// Base class for all pdeforge-specific failures.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A file violated the EPDE-GRID format (or another on-disk layout).
class FormatError : public Error {
public:
    using Error::Error;
};

/// Values are unusable: non-finite entries, shape mismatches, empty input.
class DataError : public Error {
public:
    using Error::Error;
};

/// A configuration value is out of range or inconsistent.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A term references a token signature the cache cannot resolve.
class MissingTokenError : public Error {
public:
    using Error::Error;
};

} // namespace pdeforge
