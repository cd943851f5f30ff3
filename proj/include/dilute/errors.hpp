#pragma once

#include <stdexcept>
#include <string>

namespace dilute {

/// Bad user input: parameters, configs, preconditions the caller controls.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// Problem size exceeds an index range or a desk-scale guard.
class CapacityError : public std::length_error {
public:
    explicit CapacityError(const std::string& what) : std::length_error(what) {}
};

/// An iterative solver ran out of sweeps. For the dense oracle this means a kernel bug.
class ConvergenceError : public std::runtime_error {
public:
    explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

/// A post-condition that holds mathematically was found violated.
class InternalError : public std::logic_error {
public:
    explicit InternalError(const std::string& what) : std::logic_error(what) {}
};

/// A guarantee the caller relied on does not hold for the given input,
/// e.g. a spread set without enough energy or a rejection sampler that gave up.
class GuaranteeError : public std::runtime_error {
public:
    explicit GuaranteeError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dilute
