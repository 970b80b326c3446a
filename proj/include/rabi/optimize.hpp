// optimize.hpp: one-dimensional minimization and root bracketing.

#pragma once

#include <functional>

namespace rabi::optimize {

using Objective = std::function<double(double)>;

struct Extremum {
    double x = 0.0;
    double fx = 0.0;
    int evaluations = 0;
};

// Brent's golden-section / parabolic-interpolation minimizer on [a, b]
// started from x0 (a < x0 < b). Stops when the bracket around the minimum is
// narrower than 2 * xtol in absolute terms.
Extremum brent_minimize(const Objective& f, double a, double x0, double b, double xtol, int max_iter = 500);

// Root of f on a sign-changing bracket [a, b] (TOMS 748). Terminates once the
// bracket is narrower than xtol; the returned fx is f at the better endpoint.
Extremum bracketed_root(const Objective& f, double a, double b, double xtol, int max_iter = 200);

}  // namespace rabi::optimize
