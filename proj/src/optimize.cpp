#include "rabi/optimize.hpp"

#include "rabi/errors.hpp"

#include <boost/math/tools/toms748_solve.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>

namespace rabi::optimize {

// Boost's brent_find_minima only takes a relative tolerance of at most
// sqrt(machine epsilon); resonance detunings need an absolute one.
Extremum brent_minimize(const Objective& f, double a, double x0, double b, double xtol, int max_iter) {
    if (!(a < x0 && x0 < b)) throw ValidationError("brent_minimize: need a < x0 < b");
    constexpr double golden = 0.3819660112501051;
    const double eps = std::sqrt(std::numeric_limits<double>::epsilon());

    Extremum out;
    double x = x0, w = x0, v = x0;
    double fx = f(x);
    ++out.evaluations;
    double fw = fx, fv = fx;
    double d = 0.0, e = 0.0;

    for (int iter = 0; iter < max_iter; ++iter) {
        const double mid = 0.5 * (a + b);
        const double tol1 = eps * std::abs(x) * 1e-4 + xtol;
        const double tol2 = 2.0 * tol1;
        if (std::abs(x - mid) <= tol2 - 0.5 * (b - a)) break;

        bool golden_step = true;
        if (std::abs(e) > tol1) {
            double r = (x - w) * (fx - fv);
            double q = (x - v) * (fx - fw);
            double p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if (q > 0) p = -p;
            q = std::abs(q);
            const double e_prev = e;
            e = d;
            if (std::abs(p) < std::abs(0.5 * q * e_prev) && p > q * (a - x) && p < q * (b - x)) {
                d = p / q;
                const double u = x + d;
                if (u - a < tol2 || b - u < tol2) d = (mid > x) ? tol1 : -tol1;
                golden_step = false;
            }
        }
        if (golden_step) {
            e = (x >= mid) ? a - x : b - x;
            d = golden * e;
        }
        const double u = std::abs(d) >= tol1 ? x + d : x + (d > 0 ? tol1 : -tol1);
        const double fu = f(u);
        ++out.evaluations;

        if (fu <= fx) {
            (u >= x ? a : b) = x;
            v = w; fv = fw;
            w = x; fw = fx;
            x = u; fx = fu;
        } else {
            (u < x ? a : b) = u;
            if (fu <= fw || w == x) {
                v = w; fv = fw;
                w = u; fw = fu;
            } else if (fu <= fv || v == x || v == w) {
                v = u; fv = fu;
            }
        }
    }
    out.x = x;
    out.fx = fx;
    return out;
}

Extremum bracketed_root(const Objective& f, double a, double b, double xtol, int max_iter) {
    Extremum out;
    auto counted = [&](double x) {
        ++out.evaluations;
        return f(x);
    };
    const double fa = counted(a);
    const double fb = counted(b);
    if (fa == 0.0) return {a, fa, out.evaluations};
    if (fb == 0.0) return {b, fb, out.evaluations};
    if ((fa > 0) == (fb > 0)) throw NoBracket("bracketed_root: no sign change on the interval");

    std::uintmax_t iters = static_cast<std::uintmax_t>(max_iter);
    auto done = [xtol](double lo, double hi) { return std::abs(hi - lo) <= xtol; };
    const auto [lo, hi] = boost::math::tools::toms748_solve(counted, a, b, fa, fb, done, iters);
    const double flo = counted(lo);
    const double fhi = counted(hi);
    if (std::abs(flo) <= std::abs(fhi)) {
        out.x = lo;
        out.fx = flo;
    } else {
        out.x = hi;
        out.fx = fhi;
    }
    return out;
}

}  // namespace rabi::optimize
