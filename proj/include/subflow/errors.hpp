#pragma once

#include <stdexcept>
#include <string>

namespace subflow {

/// Base class for all errors raised by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatchError : Error {
    using Error::Error;
};

/// Target point lies in (or too close to) the cut locus of the base point.
struct CutLocusError : Error {
    using Error::Error;
};

/// All raw kernel values underflowed; no neighborhood to work with.
struct EmptyNeighborhoodError : Error {
    using Error::Error;
};

/// The eigenvalue gap at the queried point vanished: the subbundle is
/// undefined there. `step` is set when detected mid-integration.
struct SingularPointError : Error {
    explicit SingularPointError(const std::string& msg, int step_index = -1)
        : Error(msg), step(step_index) {}
    int step = -1;
};

/// Trajectory left the data support by more than the configured bound.
struct DivergenceError : Error {
    explicit DivergenceError(const std::string& msg, int step_index = -1)
        : Error(msg), step(step_index) {}
    int step = -1;
};

/// Every restart of the log optimization failed its first line search.
struct NoDescentError : Error {
    using Error::Error;
};

struct NoSubmanifoldInRangeError : Error {
    using Error::Error;
};

/// Query outside the domain of a coordinate chart.
struct ChartDomainError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

}  // namespace subflow
