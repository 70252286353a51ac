#pragma once
// errors.hpp - exception types shared by every module

#include <stdexcept>
#include <string>

namespace qmtc {

// Input outside an operation's domain (bad dims, non-hermitian, pole collisions...)
struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Numerical failure on valid input (non-finite values, integrator blow-up)
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace qmtc
