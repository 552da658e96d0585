#pragma once

#include <stdexcept>
#include <string>

namespace curveq {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid parameter vector or evaluation point (e.g. Emax with theta3 + d == 0).
class DomainError : public Error {
public:
    using Error::Error;
};

// Inverse target response outside the attainable range of the curve.
class NotAttainableError : public Error {
public:
    using Error::Error;
};

// Operation requires a strictly monotone curve and the model is not.
class UnsupportedModelError : public Error {
public:
    using Error::Error;
};

// Singular information or design matrix.
class RankDeficiencyError : public Error {
public:
    using Error::Error;
};

// Iterative solver failed to converge where a result is mandatory.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

// Malformed dataset or configuration input; message carries file/line context.
class ParseError : public Error {
public:
    using Error::Error;
};

// Structurally valid but semantically inconsistent analysis configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace curveq
