#pragma once

#include <stdexcept>
#include <string>

namespace koop {

// Base for everything thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Dimension / shape mismatch in numeric kernels.
struct ShapeError : Error {
    using Error::Error;
};

// Operation needs state that was never produced (e.g. backward without a forward cache).
struct StateError : Error {
    using Error::Error;
};

// Non-finite values, negative curvature, and similar numeric failures.
struct NumericError : Error {
    using Error::Error;
};

// Caller passed an argument outside the documented domain.
struct ArgumentError : Error {
    using Error::Error;
};

// Malformed text input (CSV rows, JSON fields); message carries the location.
struct ParseError : Error {
    using Error::Error;
};

// File-level structural problems (wrong magic, wrong header, wrong family).
struct FormatError : Error {
    using Error::Error;
};

struct VersionError : FormatError {
    using FormatError::FormatError;
};

struct TruncatedError : FormatError {
    using FormatError::FormatError;
};

struct DimensionError : FormatError {
    using FormatError::FormatError;
};

// A feature with max == min cannot be min-max scaled.
struct DegenerateFeatureError : Error {
    using Error::Error;
};

// Reference point outside the arm's reachable set.
struct WorkspaceError : Error {
    using Error::Error;
};

// Least-squares fit failed (rank deficiency, non-finite data).
struct FitError : Error {
    using Error::Error;
};

// Run configuration invalid (unknown key, bad value, inconsistent dims).
struct ConfigError : Error {
    using Error::Error;
};

// Filesystem access failed.
struct IoError : Error {
    using Error::Error;
};

}  // namespace koop
