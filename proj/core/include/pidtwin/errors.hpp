#pragma once

#include <stdexcept>
#include <string>

namespace pidtwin {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// plan loading / tiling
class UnreadableFile : public Error {
public:
    using Error::Error;
};
class UnsupportedFormat : public Error {
public:
    using Error::Error;
};
class InvalidTiling : public Error {
public:
    using Error::Error;
};
class OutOfTile : public Error {
public:
    using Error::Error;
};

// symbol detection / annotation ingest
class EmptyTemplateSet : public Error {
public:
    using Error::Error;
};
class SchemaViolation : public Error {
public:
    using Error::Error;
};
class BoxOutOfBounds : public Error {
public:
    using Error::Error;
};

// export
class UnmappedClass : public Error {
public:
    using Error::Error;
};
class TemplateFieldUnknown : public Error {
public:
    using Error::Error;
};
class LabelCollision : public Error {
public:
    using Error::Error;
};

// evaluation / fixtures
class SymbolSetMismatch : public Error {
public:
    using Error::Error;
};
class InfeasibleLayout : public Error {
public:
    using Error::Error;
};

// configuration
class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace pidtwin
