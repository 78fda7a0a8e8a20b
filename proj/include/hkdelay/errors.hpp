#pragma once

#include <stdexcept>
#include <string>

namespace hkdelay {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain (negative distance, non-unit direction, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Query outside a tabulated or recorded range.
class RangeError : public Error {
public:
    using Error::Error;
};

/// Invalid model or run parameter (N < 2, dt <= 0, ...).
class ParameterError : public Error {
public:
    using Error::Error;
};

/// An initial path moves at or above the propagation speed.
class LipschitzViolation : public Error {
public:
    using Error::Error;
};

/// Knots must be appended in strictly increasing time order.
class OrderingError : public Error {
public:
    using Error::Error;
};

/// A position was requested before the earliest materialized time.
/// `deficit()` is how much further back the history would have to reach.
class HistoryUnderrun : public RangeError {
public:
    HistoryUnderrun(const std::string& what, double deficit)
        : RangeError(what), deficit_(deficit) {}
    double deficit() const noexcept { return deficit_; }

private:
    double deficit_;
};

/// A position was requested after the latest recorded time.
class FutureQuery : public RangeError {
public:
    using RangeError::RangeError;
};

/// The implicit delay equation could not be solved or bracketed.
class SolverError : public Error {
public:
    using Error::Error;
};

}  // namespace hkdelay
