#pragma once

#include <stdexcept>
#include <string>

namespace angleform {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Two points that must be distinct are closer than the coincidence threshold.
struct CoincidentPoints : Error {
    using Error::Error;
};

/// A reference configuration has zero spread (all points coincide).
struct DegenerateReference : Error {
    using Error::Error;
};

/// A target configuration violates strong nondegeneracy.
struct DegenerateTarget : Error {
    using Error::Error;
};

/// A sensing graph violates the leader/first-follower structure.
struct InvalidSensingGraph : Error {
    using Error::Error;
};

/// Leader and first follower coincide where they must not.
struct CoincidentLeaders : Error {
    using Error::Error;
};

/// A scenario violates its invariants.
struct InvalidScenario : Error {
    using Error::Error;
};

/// Integration step exceeds the stability guard.
struct StepTooLarge : Error {
    using Error::Error;
};

/// Not enough usable samples for a fit.
struct InsufficientData : Error {
    using Error::Error;
};

}  // namespace angleform
