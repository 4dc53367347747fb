#pragma once

// Reference computations for the unit tests. They use Boost quadrature and plain bisection so
// they share no code path with the library's own integrator and root finders.

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/erf.hpp>

#include <cmath>
#include <functional>
#include <limits>

namespace oracle {

inline double phi(double x) { return 0.5 * boost::math::erfc(-x / std::sqrt(2.0)); }

inline double gk(const std::function<double(double)>& f, double lo, double hi) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, hi, 15, 1e-14);
}

inline double bisect(const std::function<double(double)>& cdf, double p, double lo, double hi) {
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (cdf(mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

inline double beta25_cdf(double x) {
    return gk([](double t) { return 30.0 * t * std::pow(1.0 - t, 4); }, 0.0, x);
}

// P(σ(X)|Z| ≤ r) for X on [0,1] with density `design_pdf`.
inline double mixture_cdf(const std::function<double(double)>& design_pdf, const std::function<double(double)>& scale,
                          double r) {
    return gk([&](double x) { return (2.0 * phi(r / scale(x)) - 1.0) * design_pdf(x); }, 0.0, 1.0);
}

// ½∫|φ(t − s) − φ(t + s)| dt with s = a√n.
inline double tv_shift(double a, int n) {
    const double s = a * std::sqrt(static_cast<double>(n));
    auto f = [s](double t) {
        return std::abs(std::exp(-0.5 * (t - s) * (t - s)) - std::exp(-0.5 * (t + s) * (t + s))) /
               std::sqrt(2.0 * M_PI) / 2.0;
    };
    boost::math::quadrature::tanh_sinh<double> ts;
    constexpr double inf = std::numeric_limits<double>::infinity();
    return ts.integrate(f, -inf, 0.0) + ts.integrate(f, 0.0, inf);
}

}  // namespace oracle
