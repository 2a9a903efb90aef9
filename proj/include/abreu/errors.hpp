#pragma once

#include <stdexcept>

namespace abreu {

/// det D^2 u <= 0 where positivity is required.
struct DegenerateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The sparse linear solve failed or missed its residual contract.
struct LinSolveError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace abreu
