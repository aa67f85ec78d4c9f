#pragma once

#include <stdexcept>
#include <string>

namespace ylr {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad parameters, violated preconditions, shape mismatches. CLI exit code 2.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Unreadable or malformed input files. CLI exit code 3.
class IngestionError : public Error {
public:
    using Error::Error;
};

// Physically impossible scene, e.g. target overlapping the front vehicle.
class InfeasibleError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

}  // namespace ylr
