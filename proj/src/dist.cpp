#include "cbench/dist.hpp"

#include "cbench/errors.hpp"
#include "cbench/quadrature.hpp"
#include "cbench/special.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

namespace cbench::dist {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kBisectionCap = 200;

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool finite(double v) { return std::isfinite(v); }

void validate(const UnivariateLaw::Params& params) {
    std::visit(Overloaded{
                   [](const Uniform& u) {
                       if (!(finite(u.lo) && finite(u.hi) && u.lo < u.hi))
                           throw ParameterError("Uniform(a,b) requires finite a < b");
                   },
                   [](const Beta& b) {
                       if (!(finite(b.alpha) && finite(b.beta) && b.alpha > 0.0 && b.beta > 0.0))
                           throw ParameterError("Beta(α,β) requires α > 0 and β > 0");
                   },
                   [](const Normal& n) {
                       if (!(finite(n.mean) && finite(n.variance) && n.variance > 0.0))
                           throw ParameterError("Normal(μ,σ²) requires σ² > 0");
                   },
                   [](const Exponential& e) {
                       if (!(finite(e.rate) && e.rate > 0.0)) throw ParameterError("Exponential(rate) requires rate > 0");
                   },
                   [](const PointMass& p) {
                       if (!finite(p.at)) throw ParameterError("PointMass(c) requires finite c");
                   },
               },
               params);
}

double beta_log_norm(const Beta& b) { return std::lgamma(b.alpha) + std::lgamma(b.beta) - std::lgamma(b.alpha + b.beta); }

// Smallest x in [lo, hi] with cdf(x) ≥ p.
double bisect_cdf(const std::function<double(double)>& cdf, double p, double lo, double hi) {
    for (int it = 0; it < kBisectionCap; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (cdf(mid) >= p) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

}  // namespace

bool operator==(const Uniform& a, const Uniform& b) { return a.lo == b.lo && a.hi == b.hi; }
bool operator==(const Beta& a, const Beta& b) { return a.alpha == b.alpha && a.beta == b.beta; }
bool operator==(const Normal& a, const Normal& b) { return a.mean == b.mean && a.variance == b.variance; }
bool operator==(const Exponential& a, const Exponential& b) { return a.rate == b.rate; }
bool operator==(const PointMass& a, const PointMass& b) { return a.at == b.at; }
bool operator==(const UnivariateLaw& a, const UnivariateLaw& b) { return a.params_ == b.params_; }

UnivariateLaw::UnivariateLaw(Params params) : params_(params) { validate(params_); }

UnivariateLaw UnivariateLaw::uniform(double lo, double hi) { return UnivariateLaw(Uniform{lo, hi}); }
UnivariateLaw UnivariateLaw::beta(double alpha, double beta) { return UnivariateLaw(Beta{alpha, beta}); }
UnivariateLaw UnivariateLaw::normal(double mean, double variance) { return UnivariateLaw(Normal{mean, variance}); }
UnivariateLaw UnivariateLaw::exponential(double rate) { return UnivariateLaw(Exponential{rate}); }
UnivariateLaw UnivariateLaw::point_mass(double at) { return UnivariateLaw(PointMass{at}); }

std::string UnivariateLaw::describe() const {
    std::ostringstream out;
    out.precision(17);
    std::visit(Overloaded{
                   [&](const Uniform& u) { out << "Uniform(" << u.lo << "," << u.hi << ")"; },
                   [&](const Beta& b) { out << "Beta(" << b.alpha << "," << b.beta << ")"; },
                   [&](const Normal& n) { out << "Normal(" << n.mean << "," << n.variance << ")"; },
                   [&](const Exponential& e) { out << "Exponential(" << e.rate << ")"; },
                   [&](const PointMass& p) { out << "PointMass(" << p.at << ")"; },
               },
               params_);
    return out.str();
}

double UnivariateLaw::cdf(double x) const {
    if (std::isnan(x)) throw DomainError("cdf: x is NaN");
    return std::visit(Overloaded{
                          [x](const Uniform& u) { return std::clamp((x - u.lo) / (u.hi - u.lo), 0.0, 1.0); },
                          [x](const Beta& b) {
                              if (x <= 0.0) return 0.0;
                              if (x >= 1.0) return 1.0;
                              return boost::math::ibeta(b.alpha, b.beta, x);
                          },
                          [x](const Normal& n) { return normal_cdf((x - n.mean) / std::sqrt(n.variance)); },
                          [x](const Exponential& e) { return x <= 0.0 ? 0.0 : -std::expm1(-e.rate * x); },
                          [x](const PointMass& p) { return x >= p.at ? 1.0 : 0.0; },
                      },
                      params_);
}

double UnivariateLaw::pdf(double x) const {
    return std::visit(Overloaded{
                          [x](const Uniform& u) { return (x >= u.lo && x <= u.hi) ? 1.0 / (u.hi - u.lo) : 0.0; },
                          [x](const Beta& b) {
                              if (x < 0.0 || x > 1.0) return 0.0;
                              if ((x == 0.0 && b.alpha != 1.0) || (x == 1.0 && b.beta != 1.0)) {
                                  const double exponent = x == 0.0 ? b.alpha : b.beta;
                                  return exponent > 1.0 ? 0.0 : kInf;
                              }
                              const double log_density = (b.alpha - 1.0) * std::log(x) +
                                                         (b.beta - 1.0) * std::log1p(-x) - beta_log_norm(b);
                              return std::exp(log_density);
                          },
                          [x](const Normal& n) {
                              const double sd = std::sqrt(n.variance);
                              return normal_pdf((x - n.mean) / sd) / sd;
                          },
                          [x](const Exponential& e) { return x < 0.0 ? 0.0 : e.rate * std::exp(-e.rate * x); },
                          [](const PointMass&) -> double { throw DomainError("pdf: a point mass has no density"); },
                      },
                      params_);
}

double UnivariateLaw::quantile(double p) const {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile: p must lie in (0,1)");
    return std::visit(Overloaded{
                          [p](const Uniform& u) { return u.lo + p * (u.hi - u.lo); },
                          [p, this](const Beta&) { return bisect_cdf([this](double x) { return cdf(x); }, p, 0.0, 1.0); },
                          [p](const Normal& n) { return n.mean + std::sqrt(n.variance) * normal_quantile(p); },
                          [p](const Exponential& e) { return -std::log1p(-p) / e.rate; },
                          [](const PointMass& pm) { return pm.at; },
                      },
                      params_);
}

double UnivariateLaw::mean() const {
    return std::visit(Overloaded{
                          [](const Uniform& u) { return 0.5 * (u.lo + u.hi); },
                          [](const Beta& b) { return b.alpha / (b.alpha + b.beta); },
                          [](const Normal& n) { return n.mean; },
                          [](const Exponential& e) { return 1.0 / e.rate; },
                          [](const PointMass& p) { return p.at; },
                      },
                      params_);
}

std::pair<double, double> UnivariateLaw::support() const {
    return std::visit(Overloaded{
                          [](const Uniform& u) { return std::pair{u.lo, u.hi}; },
                          [](const Beta&) { return std::pair{0.0, 1.0}; },
                          [](const Normal&) { return std::pair{-kInf, kInf}; },
                          [](const Exponential&) { return std::pair{0.0, kInf}; },
                          [](const PointMass& p) { return std::pair{p.at, p.at}; },
                      },
                      params_);
}

double UnivariateLaw::draw(Rng& rng) const {
    return std::visit(Overloaded{
                          [&rng](const Uniform& u) { return u.lo + (u.hi - u.lo) * rng.uniform(); },
                          [&rng](const Beta& b) {
                              const double g1 = rng.gamma(b.alpha);
                              const double g2 = rng.gamma(b.beta);
                              return g1 / (g1 + g2);
                          },
                          [&rng](const Normal& n) { return n.mean + std::sqrt(n.variance) * rng.normal(); },
                          [&rng](const Exponential& e) { return rng.exponential() / e.rate; },
                          [](const PointMass& p) { return p.at; },
                      },
                      params_);
}

double UnivariateLaw::expect(const std::function<double(double)>& g, double abs_tol) const {
    const QuadratureOptions opts{abs_tol, 0.0, 4000};
    auto weighted = [&](double x) { return g(x) * pdf(x); };
    return std::visit(
        Overloaded{
            [&](const Uniform& u) { return integrate(weighted, u.lo, u.hi, opts).value; },
            [&](const Beta& b) {
                // Shapes below one put integrable poles at the endpoints.
                if (b.alpha < 1.0 || b.beta < 1.0) {
                    return boost::math::quadrature::tanh_sinh<double>().integrate(weighted, 0.0, 1.0);
                }
                const std::array<double, 5> bp{0.0, 0.25, 0.5, 0.75, 1.0};
                return integrate(weighted, bp, opts).value;
            },
            [&](const Normal& n) {
                const double sd = std::sqrt(n.variance);
                std::array<double, 11> bp{-40, -12, -6, -3, -1, 0, 1, 3, 6, 12, 40};
                for (double& b : bp) b = n.mean + sd * b;
                return integrate(weighted, bp, opts).value;
            },
            [&](const Exponential& e) {
                std::array<double, 10> bp{0, 0.5, 1, 2, 4, 8, 16, 32, 64, 750};
                for (double& b : bp) b /= e.rate;
                return integrate(weighted, bp, opts).value;
            },
            [&](const PointMass& p) { return g(p.at); },
        },
        params_);
}

std::vector<double> sample(const UnivariateLaw& law, std::size_t n, SeedSpec seed) {
    Rng rng(seed);
    std::vector<double> out(n);
    for (double& v : out) v = law.draw(rng);
    return out;
}

ConditionalModel::ConditionalModel(RealFn mean_fn, RealFn scale_fn, UnivariateLaw noise)
    : mean_fn_(std::move(mean_fn)), scale_fn_(std::move(scale_fn)), noise_(std::move(noise)) {
    if (!mean_fn_ || !scale_fn_) throw ParameterError("ConditionalModel: mean and scale functions are required");
}

double ConditionalModel::scale(double x) const {
    const double s = scale_fn_(x);
    if (!(s > 0.0) || !std::isfinite(s)) {
        std::ostringstream msg;
        msg << "ConditionalModel: scale σ(" << x << ") = " << s << " is not positive";
        throw ParameterError(msg.str());
    }
    return s;
}

double ConditionalModel::draw_y(double x, Rng& rng) const { return mean(x) + scale(x) * noise_.draw(rng); }

double ConditionalModel::cdf_y(double x, double y) const { return noise_.cdf((y - mean(x)) / scale(x)); }

double ConditionalModel::quantile_y(double x, double p) const { return mean(x) + scale(x) * noise_.quantile(p); }

void ConditionalModel::validate_scale(std::span<const double> xs) const {
    for (double x : xs) (void)scale(x);
}

std::vector<LabeledPoint> sample_pairs(const UnivariateLaw& design, const ConditionalModel& model, std::size_t n,
                                       Rng& rng) {
    std::vector<LabeledPoint> out(n);
    for (auto& pt : out) {
        pt.x = design.draw(rng);
        pt.y = model.draw_y(pt.x, rng);
    }
    return out;
}

double mixture_residual_cdf(const UnivariateLaw& design, const RealFn& scale_fn, double r) {
    if (!(r > 0.0)) return 0.0;
    if (std::isinf(r)) return 1.0;
    auto folded = [&](double x) {
        const double s = scale_fn(x);
        if (!(s > 0.0)) {
            std::ostringstream msg;
            msg << "mixture_residual_cdf: scale σ(" << x << ") = " << s << " is not positive on the design support";
            throw ParameterError(msg.str());
        }
        return half_normal_cdf(r / s);
    };
    return std::clamp(design.expect(folded, 1e-10), 0.0, 1.0);
}

double mixture_residual_quantile(const UnivariateLaw& design, const RealFn& scale_fn, double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("mixture_residual_quantile: p must lie in (0,1)");
    double lo = 0.0;
    double hi = 1.0;
    int doublings = 0;
    while (mixture_residual_cdf(design, scale_fn, hi) < p) {
        lo = hi;
        hi *= 2.0;
        if (++doublings > kBisectionCap) {
            throw NumericError("mixture_residual_quantile: could not bracket p = " + std::to_string(p));
        }
    }
    for (int it = 0; it < kBisectionCap; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double c = mixture_residual_cdf(design, scale_fn, mid);
        if (c >= p) {
            hi = mid;
        } else {
            lo = mid;
        }
        if (hi - lo < 1e-13 * std::max(1.0, hi)) break;
    }
    return 0.5 * (lo + hi);
}

std::size_t order_statistic_index(std::size_t m, double p, QuantileRule rule) {
    if (m == 0) throw DomainError("empirical_quantile: empty list");
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("empirical_quantile: p must lie in [0,1]");
    const double scaled = p * static_cast<double>(rule == QuantileRule::Conformal ? m + 1 : m);
    // Absorb representation error such as 0.3*10 = 3.0000000000000004.
    const double k = std::ceil(scaled - 1e-9);
    return static_cast<std::size_t>(std::clamp(k, 1.0, static_cast<double>(m)));
}

double empirical_quantile(std::span<const double> values, double p, QuantileRule rule) {
    const std::size_t k = order_statistic_index(values.size(), p, rule);
    std::vector<double> copy(values.begin(), values.end());
    std::nth_element(copy.begin(), copy.begin() + static_cast<std::ptrdiff_t>(k - 1), copy.end());
    return copy[k - 1];
}

double tv_gaussian_shift(double a, int n) {
    if (!(a > 0.0) || !std::isfinite(a)) throw ParameterError("tv_gaussian_shift: a must be positive");
    if (n < 1) throw ParameterError("tv_gaussian_shift: n must be at least 1");
    return std::erf(a * std::sqrt(static_cast<double>(n)) / kSqrt2);
}

}  // namespace cbench::dist
