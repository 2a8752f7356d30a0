#pragma once

#include <stdexcept>
#include <string>

namespace fqkit {

// Base of every error thrown by the library. The CLI maps UsageError and
// ConfigError to exit code 2 and everything else to exit code 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UsageError : public Error {
public:
    using Error::Error;
};

class UnknownFunction : public UsageError {
public:
    explicit UnknownFunction(const std::string& name)
        : UsageError("unknown function '" + name + "'") {}
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class RangeError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace fqkit
