#pragma once

#include <stdexcept>
#include <string>

namespace nfpc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition or structural hypothesis was violated (bad grid, inadmissible
/// control, coefficient model failing ellipticity, ...).
class ContractError : public Error {
public:
    using Error::Error;
};

/// Configuration could not be parsed or resolved.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A coefficient or cost evaluator produced a non-finite value.
class ModelError : public Error {
public:
    using Error::Error;
};

/// A time-marching solver blew up or its output violated a scheme invariant.
class SolverError : public Error {
public:
    using Error::Error;
};

}  // namespace nfpc
