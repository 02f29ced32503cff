#pragma once

#include <stdexcept>
#include <string>

namespace mckv {

/// Invalid or inconsistent configuration / precondition violation (CLI exit code 2).
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A numerical routine left its validity envelope (NaN, non-convergence hard stop).
/// CLI exit code 3.
struct NumericalDivergence : std::runtime_error {
    NumericalDivergence(const std::string& what, int iteration = -1, double time = 0.0)
        : std::runtime_error(what), iteration(iteration), time(time) {}
    int iteration;
    double time;
};

/// Solver refused to run because the parameter set fails the weak well-posedness
/// gate and no override was requested (CLI exit code 4).
struct ThresholdGateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace mckv
