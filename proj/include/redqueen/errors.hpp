#pragma once
/// @file errors.hpp
/// Exception taxonomy shared by the whole library.

#include <stdexcept>
#include <string>

namespace redqueen {

/// Invalid parameter values, malformed configuration input, or bad arguments.
struct config_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A population mass that must stay positive vanished or went negative.
struct degenerate_mass_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Time integration left the tolerated range (blow-up or negativity).
struct instability_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The requested object does not exist for the given parameters.
struct infeasible_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// An iterative scheme failed to converge or a series failed to decay.
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace redqueen
