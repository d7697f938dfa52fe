#pragma once

#include <stdexcept>
#include <string>

namespace asmp {

/// Bad user input: malformed files, inconsistent shapes, out-of-range ids.
/// The CLI maps this to exit code 2.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Non-finite values or other numerical breakdown mid-run.
/// The CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace asmp
