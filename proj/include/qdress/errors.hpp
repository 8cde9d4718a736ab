#pragma once

#include <stdexcept>
#include <string>

namespace qdress {

/// Base class for all qdress runtime failures.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Adaptive stepper would need a step below the minimum (stiffness misconfiguration).
struct StepUnderflow : Error {
    using Error::Error;
};

/// Successive dressed frames overlap too weakly to assign branches (time grid too coarse).
struct AmbiguousTracking : Error {
    using Error::Error;
};

/// Requested energy span exceeds the Nyquist limit of the tau grid.
struct GridTooCoarse : Error {
    using Error::Error;
};

/// Sensor coupling outside the perturbative regime.
struct CouplingTooStrong : Error {
    using Error::Error;
};

/// Operation requires a uniform time grid.
struct NonUniformGrid : Error {
    using Error::Error;
};

/// Bateman / lifetime models need distinct time constants.
struct DegenerateLifetimes : Error {
    using Error::Error;
};

/// Least-squares fit failed to converge to finite parameters.
struct FitDiverged : Error {
    using Error::Error;
};

/// A requested side-peak index is beyond the pulse's reach.
struct NoSolution : Error {
    using Error::Error;
};

/// Config file failed schema validation; message carries the offending field path.
struct ConfigInvalid : Error {
    using Error::Error;
};

/// File could not be read or written.
struct IoFailure : Error {
    using Error::Error;
};

/// Grid file is structurally broken.
struct MalformedGrid : Error {
    using Error::Error;
};

}  // namespace qdress
