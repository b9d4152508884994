#pragma once

#include <stdexcept>
#include <string>

namespace mdelm {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid user input: bad configuration, malformed files, contract violations
/// detectable before any work starts. The CLI maps this to exit code 2.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(what) {}
};

/// A ridge system is too close to interpolation (1 - h_ii below tolerance),
/// so PRESS residuals are numerically meaningless.
class NearInterpolationError : public Error {
public:
    explicit NearInterpolationError(const std::string& what) : Error(what) {}
};

}  // namespace mdelm
