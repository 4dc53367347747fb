#pragma once

#include <functional>
#include <span>

namespace cbench {

struct QuadratureOptions {
    double abs_tol = 1e-10;
    double rel_tol = 0.0;
    int max_intervals = 2000;
};

struct QuadratureResult {
    double value = 0.0;
    double abs_error = 0.0;
    int evaluations = 0;
    int intervals = 0;
};

/// Globally adaptive 7/15-point Gauss-Kronrod integration over [lo, hi].
/// Throws NumericError (with the achieved error and subdivision count) if the tolerance is
/// not met within `max_intervals` panels.
QuadratureResult integrate(const std::function<double(double)>& f, double lo, double hi,
                           const QuadratureOptions& opts = {});

/// Same, with the initial panels split at the given ascending breakpoints.
QuadratureResult integrate(const std::function<double(double)>& f, std::span<const double> breakpoints,
                           const QuadratureOptions& opts = {});

}  // namespace cbench
