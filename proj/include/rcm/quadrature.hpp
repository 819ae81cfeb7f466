#pragma once

#include <functional>
#include <vector>

namespace rcm::quad {

struct Result {
    double value = 0.0;
    double error = 0.0;  ///< estimated absolute error
    int intervals = 0;
    bool converged = false;
};

using Integrand = std::function<double(double)>;

/// Globally adaptive Gauss-Kronrod (7/15) on [a, b]. Breakpoints inside
/// (a, b) seed the initial partition so that kinks and jumps sit on
/// interval ends. Stops once the summed error estimate is <= abs_tol or
/// max_intervals is reached (then converged = false).
Result integrate(const Integrand& f, double a, double b, std::vector<double> breakpoints, double abs_tol,
                 int max_intervals = 2000);

/// Integral over [a, inf) through the map x = a + t / (1 - t).
Result integrate_to_infinity(const Integrand& f, double a, double abs_tol, int max_intervals = 2000);

}  // namespace rcm::quad
