#pragma once

#include <stdexcept>
#include <string>

namespace km2sls {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad input data: mismatched dimensions, non-finite values, malformed CSV,
// status flags outside {0,1}, too few rows, and similar.
class InvalidDataError : public Error {
public:
    using Error::Error;
};

// Numerical failure while fitting or simulating.
class NumericError : public Error {
public:
    using Error::Error;
};

// A matrix that must be inverted is singular or too ill-conditioned.
class RankError : public NumericError {
public:
    using NumericError::NumericError;
};

// The sample cannot support estimation at all (e.g. every outcome censored).
class DegenerateSampleError : public NumericError {
public:
    using NumericError::NumericError;
};

// A user-supplied moment function returned a non-finite value.
class EvaluationError : public Error {
public:
    using Error::Error;
};

}  // namespace km2sls
