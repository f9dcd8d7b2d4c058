#pragma once

#include <stdexcept>
#include <string>

namespace procqm {

// Base for all toolkit errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad user-facing configuration: grid specs, axis tokens, run parameters.
struct ConfigError : Error {
    using Error::Error;
};

// A measurement found no visit along its axis in the supplied path.
struct EmptyVisibleSetError : Error {
    using Error::Error;
};

// An instance references unknown points/outcomes or is internally inconsistent.
struct MalformedInstanceError : Error {
    using Error::Error;
};

// Reduction to a point-based model requires every supported path to have length 1.
struct NotSingletonError : Error {
    using Error::Error;
};

// The overlap checker only applies to an orthogonal eigenstate pair.
struct NotOrthogonalError : Error {
    using Error::Error;
};

}  // namespace procqm
