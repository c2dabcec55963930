#pragma once

#include <stdexcept>
#include <string>

namespace nlest {

// Bad input: out-of-range parameters, malformed files, shape mismatches.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A mathematical hypothesis of an operation does not hold for the given data
// (e.g. a target outside the Pucci interval, |E| too large for the dyadic
// decomposition).
class HypothesisError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Singular systems, failed monotonicity certificates, non-finite values.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace nlest
