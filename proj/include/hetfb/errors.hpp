#pragma once

#include <stdexcept>
#include <string>

namespace hetfb {

/// Configuration or argument violates a documented invariant.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical routine could not meet its accuracy contract
/// (quadrature non-convergence, ill-conditioned expansion, ...).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace hetfb
