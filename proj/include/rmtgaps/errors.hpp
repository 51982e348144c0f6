#pragma once

#include <stdexcept>
#include <string>

namespace rmtgaps {

// Bad input: violated parameter constraint, malformed query or config.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Argument outside the mathematical domain of a special function.
class DomainError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// Anything that went wrong while computing a number.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConvergenceError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class SingularMatrixError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class ModelBuildError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class NotDirectlyConstructible : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace rmtgaps
