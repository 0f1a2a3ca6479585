#pragma once

#include <stdexcept>
#include <string>

namespace pdd {

/// Bad input data: malformed files, invalid parameters, violated preconditions.
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numeric failure: degenerate geometry, unsolvable systems, failed reconstruction.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace pdd
