#include "cbench/quadrature.hpp"

#include "cbench/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <sstream>
#include <vector>

namespace cbench {

namespace {

// Kronrod abscissae (descending, last is the centre) and weights; Gauss weights for the
// odd-indexed abscissae plus the centre.
constexpr std::array<double, 8> kXgk = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                        0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                        0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                        0.207784955007898467600689403773245, 0.0};
constexpr std::array<double, 8> kWgk = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                        0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                        0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                        0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                       0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double lo;
    double hi;
    double value;
    double error;
    bool operator<(const Panel& other) const { return error < other.error; }
};

Panel gauss_kronrod(const std::function<double(double)>& f, double lo, double hi) {
    const double centre = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    const double fc = f(centre);
    double kronrod = fc * kWgk[7];
    double gauss = fc * kWg[3];
    for (int i = 0; i < 7; ++i) {
        const double dx = half * kXgk[i];
        const double sum = f(centre - dx) + f(centre + dx);
        kronrod += kWgk[i] * sum;
        if (i % 2 == 1) gauss += kWg[i / 2] * sum;
    }
    return Panel{lo, hi, kronrod * half, std::abs((kronrod - gauss) * half)};
}

}  // namespace

QuadratureResult integrate(const std::function<double(double)>& f, std::span<const double> breakpoints,
                           const QuadratureOptions& opts) {
    if (breakpoints.size() < 2) throw ParameterError("integrate: need at least two breakpoints");
    if (!std::is_sorted(breakpoints.begin(), breakpoints.end()))
        throw ParameterError("integrate: breakpoints must be ascending");

    std::priority_queue<Panel> panels;
    double value = 0.0;
    double error = 0.0;
    int evaluations = 0;
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
        if (breakpoints[i] == breakpoints[i + 1]) continue;
        Panel p = gauss_kronrod(f, breakpoints[i], breakpoints[i + 1]);
        evaluations += 15;
        value += p.value;
        error += p.error;
        panels.push(p);
    }

    auto tolerance = [&] { return std::max(opts.abs_tol, opts.rel_tol * std::abs(value)); };
    while (error > tolerance()) {
        if (static_cast<int>(panels.size()) >= opts.max_intervals) {
            std::ostringstream msg;
            msg << "integrate: no convergence on [" << breakpoints.front() << ", " << breakpoints.back()
                << "]: estimate " << value << ", error " << error << " > tolerance " << tolerance()
                << " after " << panels.size() << " panels";
            throw NumericError(msg.str());
        }
        const Panel worst = panels.top();
        panels.pop();
        const double mid = 0.5 * (worst.lo + worst.hi);
        const Panel left = gauss_kronrod(f, worst.lo, mid);
        const Panel right = gauss_kronrod(f, mid, worst.hi);
        evaluations += 30;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        panels.push(left);
        panels.push(right);
    }

    // Re-sum to shed the drift accumulated by incremental updates.
    double total = 0.0;
    double total_error = 0.0;
    const int count = static_cast<int>(panels.size());
    while (!panels.empty()) {
        total += panels.top().value;
        total_error += panels.top().error;
        panels.pop();
    }
    return QuadratureResult{total, total_error, evaluations, count};
}

QuadratureResult integrate(const std::function<double(double)>& f, double lo, double hi,
                           const QuadratureOptions& opts) {
    const std::array<double, 2> bounds{lo, hi};
    return integrate(f, bounds, opts);
}

}  // namespace cbench
