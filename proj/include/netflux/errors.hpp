#pragma once

#include <stdexcept>
#include <string>

namespace netflux {

/// Base class for all netflux errors. The message is path/line qualified
/// where the failing input allows it.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class GeometryError : public Error {
public:
    using Error::Error;
};

class ExpressionError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class SolverError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace netflux
