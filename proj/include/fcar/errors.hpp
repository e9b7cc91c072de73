#pragma once

#include <stdexcept>
#include <string>

namespace fcar {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A precondition on the inputs was violated.
struct InvalidArgument : Error {
    using Error::Error;
};

/// Malformed external data (CSV cells, file structure).
struct DataError : Error {
    using Error::Error;
};

/// Not enough curves for the requested lag order or fold scheme.
struct InsufficientSample : Error {
    using Error::Error;
};

/// A symmetric solve met a pivot below tolerance. Carries the pivot value
/// and the index of the offending diagonal entry.
struct SingularMatrix : Error {
    double pivot;
    int index;
    SingularMatrix(const std::string& what, double pivot_, int index_)
        : Error(what), pivot(pivot_), index(index_) {}
};

/// No admissible candidate remains for the greedy step.
struct SelectionExhausted : Error {
    using Error::Error;
};

/// A function violates membership requirements of the Brownian RKHS.
struct NotInRkhs : Error {
    using Error::Error;
};

/// The requested operation needs information that is not available
/// (e.g. the exact baseline without a generating kernel).
struct Unsupported : Error {
    using Error::Error;
};

/// A relative error against a zero-norm reference curve. Carries the
/// index of the curve whose norm vanished.
struct DivisionGuard : Error {
    int curve_index;
    DivisionGuard(const std::string& what, int curve_index_)
        : Error(what), curve_index(curve_index_) {}
};

/// A simulated recursion left the numerically safe range.
struct Instability : Error {
    using Error::Error;
};

}  // namespace fcar
