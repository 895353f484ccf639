#pragma once

#include <stdexcept>
#include <string>

namespace flsim {

// Configuration / validation failure (CLI exit code 2).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numerical failure: instability, blow-up, non-convergence (CLI exit code 3).
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace flsim
