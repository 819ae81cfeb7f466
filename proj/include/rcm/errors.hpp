#pragma once

#include <stdexcept>
#include <string>

namespace rcm {

// Precondition violations throw std::invalid_argument. The two types below
// cover the remaining failure classes the command line distinguishes.

/// A solver or quadrature did not reach its tolerance.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// A statistical self-check of an experiment failed.
class StatisticalCheckError : public std::runtime_error {
public:
    explicit StatisticalCheckError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace rcm
