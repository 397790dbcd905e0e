#pragma once

#include <stdexcept>
#include <string>

namespace ngrc {

/// Invalid or inconsistent experiment configuration (CLI exit code 1).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Missing or malformed input data (CLI exit code 2).
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical failure such as a singular solve (CLI exit code 3).
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace ngrc
