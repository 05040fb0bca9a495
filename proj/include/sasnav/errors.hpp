#pragma once

#include <stdexcept>
#include <string>

namespace sasnav {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Configuration or argument validation failed. CLI maps these to exit code 2.
class ValidationError : public Error {
public:
    using Error::Error;
};

class NonPositiveRange : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class MidpointNotZero : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class EmptyExtent : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class PhantomOutOfBounds : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class CoincidentPoint : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class TooShort : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class ShapeMismatch : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class IndexOutOfRange : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class InconsistentStride : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class RangeEmpty : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class ConfigError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Numerical failure of the estimation itself. CLI maps these to exit code 3.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// The two pings observe (numerically) orthogonal subspaces; the intersection
/// image is null and no displacement can be estimated from the pair.
class DegenerateIntersection : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// An optimizer stage exhausted its evaluation budget before reaching its
/// step tolerance.
class MaxEvaluations : public NumericalError {
public:
    using NumericalError::NumericalError;
};

} // namespace sasnav
