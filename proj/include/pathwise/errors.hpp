#pragma once

#include <stdexcept>
#include <string>

namespace pathwise {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid sizes, meshes, off-grid times, out-of-range arguments.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// A caller broke an operation's precondition (missing derivative suite, asymmetric Hessian, dimension clash).
class ContractError : public Error {
public:
    using Error::Error;
};

/// Query outside the region where an object is defined.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Blow-up, loss of parabolicity, non-monotone characteristics.
class NumericalError : public Error {
public:
    using Error::Error;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

class InternalError : public Error {
public:
    using Error::Error;
};

/// Rejected experiment configuration. `line` is 1-based, 0 when the problem has no location.
class ConfigError : public Error {
public:
    ConfigError(const std::string& message, std::string key, int line = 0)
        : Error(line > 0 ? "line " + std::to_string(line) + ", key '" + key + "': " + message
                         : "key '" + key + "': " + message),
          key_(std::move(key)),
          line_(line) {}
    const std::string& key() const { return key_; }
    int line() const { return line_; }

private:
    std::string key_;
    int line_;
};

}  // namespace pathwise
