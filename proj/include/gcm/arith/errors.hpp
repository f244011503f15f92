#pragma once

#include <stdexcept>
#include <string>

namespace gcm {

/// Base of every recoverable numerical failure. None of these ever carries a
/// wrong value: they tell the caller to subdivide or raise precision.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DivisorContainsZero : public NumericalError {
public:
    DivisorContainsZero() : NumericalError("divisor enclosure contains zero") {}
};

class BranchCutViolation : public NumericalError {
public:
    BranchCutViolation() : NumericalError("enclosure meets the branch cut (-inf, 0]") {}
};

class NonPositiveLog : public NumericalError {
public:
    NonPositiveLog() : NumericalError("real logarithm of an enclosure touching (-inf, 0]") {}
};

class DomainError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Invalid user input (measure files, rational strings, configurations).
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace gcm
