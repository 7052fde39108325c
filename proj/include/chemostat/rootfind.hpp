// Scalar root finding for monotone functions on a bracket.
#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>

namespace chemostat {

struct RootOptions {
    double abs_tol = 1e-12;  // bracket width at which bisection stops
    int max_iter = 200;
};

// Root of a continuous, strictly increasing f on [lo, hi] with f(lo) <= 0 <= f(hi).
// Plain bisection to abs_tol; optionally polished by a few guarded Newton steps
// when a derivative is supplied. Throws std::invalid_argument if the bracket
// does not straddle zero.
inline double solve_increasing(const std::function<double(double)>& f, double lo, double hi,
                               const std::function<double(double)>& df = nullptr,
                               RootOptions opts = {}) {
    if (!(lo <= hi)) throw std::invalid_argument("solve_increasing: empty bracket");
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (flo > 0.0 || fhi < 0.0)
        throw std::invalid_argument("solve_increasing: bracket does not straddle zero");

    double a = lo, b = hi;
    for (int it = 0; it < opts.max_iter && (b - a) > opts.abs_tol; ++it) {
        double mid = 0.5 * (a + b);
        if (mid <= a || mid >= b) break;  // bracket at floating-point resolution
        double fm = f(mid);
        if (fm == 0.0) return mid;
        (fm < 0.0 ? a : b) = mid;
    }
    double x = 0.5 * (a + b);

    if (df) {
        for (int it = 0; it < 8; ++it) {
            double fx = f(x);
            double dfx = df(x);
            if (dfx <= 0.0) break;  // derivative unusable here, keep bisection result
            double step = fx / dfx;
            double next = x - step;
            if (!(next > a && next < b)) break;  // would leave the bracket
            x = next;
            if (std::abs(step) < 1e-16 * std::max(1.0, std::abs(x))) break;
        }
    }
    return x;
}

// Same contract for strictly decreasing f (f(lo) >= 0 >= f(hi)).
inline double solve_decreasing(const std::function<double(double)>& f, double lo, double hi,
                               const std::function<double(double)>& df = nullptr,
                               RootOptions opts = {}) {
    auto neg = [&f](double s) { return -f(s); };
    std::function<double(double)> ndf;
    if (df) ndf = [&df](double s) { return -df(s); };
    return solve_increasing(neg, lo, hi, ndf, opts);
}

// Expands [lo, hi] to the right until f(hi) >= target (f increasing and unbounded).
inline double expand_upper(const std::function<double(double)>& f, double lo, double hi,
                           double target) {
    double width = std::max(hi - lo, 1e-6);
    for (int it = 0; it < 200; ++it) {
        if (f(hi) >= target) return hi;
        width *= 2.0;
        hi = lo + width;
    }
    throw std::runtime_error("expand_upper: target not reached");
}

}  // namespace chemostat
