#pragma once

#include <stdexcept>
#include <string>

namespace offsetmodel {

// Bad caller input (wrong sizes, malformed values). Maps to CLI exit 1.
struct InvalidInputError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Problems with data files or their contents. Maps to CLI exit 2.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Too few points to fit the requested curve.
struct InsufficientDataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Design matrix rank-deficient or otherwise unusable.
struct DegenerateFitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Requested probability never crossed by the curve.
struct NoCrossingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Query against a model that cannot answer it.
struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Amplifier configuration rejected.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace offsetmodel
