// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace flowdmd {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller passed an out-of-range or malformed argument.
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Input contained values the numerical kernels cannot accept (NaN, Inf).
class IngestionDefectError : public Error {
public:
    using Error::Error;
};

/// A required CSV column is missing or the header is malformed.
class SchemaError : public Error {
public:
    using Error::Error;
};

/// A data row carries an invalid value (negative flow, bad date, ...).
class DataError : public Error {
public:
    DataError(const std::string& what, std::size_t row)
        : Error("row " + std::to_string(row) + ": " + what), row_(row) {}

    /// 1-based data row number (the header is row 0).
    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

/// A place identifier is not present in the place index.
class MappingError : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

/// Weeks are duplicated or out of chronological order.
class OrderingError : public Error {
public:
    using Error::Error;
};

class DivisionGuardError : public Error {
public:
    using Error::Error;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

class DegenerateDataError : public Error {
public:
    using Error::Error;
};

/// A dense kernel failed to converge.
class NumericalError : public Error {
public:
    NumericalError(const std::string& what, double residual)
        : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// exp(Re(omega) * t) left the representable range.
class OverflowError : public Error {
public:
    OverflowError(const std::string& what, std::size_t mode)
        : Error(what), mode_(mode) {}

    std::size_t mode() const noexcept { return mode_; }

private:
    std::size_t mode_;
};

/// Requested test weeks are not present in the truth data.
class CoverageError : public Error {
public:
    using Error::Error;
};

/// A persisted file is truncated, has a bad magic, or an unknown version.
class FormatError : public Error {
public:
    using Error::Error;
};

}  // namespace flowdmd
