#pragma once

#include <stdexcept>
#include <string>

namespace cclqr {

// Thrown when an iterative solver fails to converge, or a matrix turns out to
// be singular/indefinite where the algorithm requires otherwise. Precondition
// violations (bad dimensions, out-of-range parameters) throw
// std::invalid_argument instead.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& message) : std::runtime_error(message) {}
};

} // namespace cclqr
