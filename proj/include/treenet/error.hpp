#pragma once

#include <stdexcept>
#include <string>

namespace treenet {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input: bad literal, invalid distribution or model, bad option.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& msg) : Error(msg) {}
};

// A size, depth or population guard was exceeded.
class GuardError : public Error {
public:
    explicit GuardError(const std::string& msg) : Error(msg) {}
};

// Internal numerical failure (e.g. a singular Kirchhoff system).
class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& msg) : Error(msg) {}
};

}  // namespace treenet
