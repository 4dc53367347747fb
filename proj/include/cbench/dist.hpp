#pragma once

#include "cbench/random.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace cbench::dist {

struct Uniform {
    double lo;
    double hi;
};
struct Beta {
    double alpha;
    double beta;
};
struct Normal {
    double mean;
    double variance;
};
struct Exponential {
    double rate;
};
struct PointMass {
    double at;
};

/// A one-dimensional probability law. Parameters are validated on construction and the
/// object is immutable afterwards.
class UnivariateLaw {
public:
    using Params = std::variant<Uniform, Beta, Normal, Exponential, PointMass>;

    static UnivariateLaw uniform(double lo, double hi);
    static UnivariateLaw beta(double alpha, double beta);
    static UnivariateLaw normal(double mean, double variance);
    static UnivariateLaw standard_normal() { return normal(0.0, 1.0); }
    static UnivariateLaw exponential(double rate);
    static UnivariateLaw point_mass(double at);

    /// Validating constructor; throws ParameterError.
    explicit UnivariateLaw(Params params);

    [[nodiscard]] const Params& params() const noexcept { return params_; }
    [[nodiscard]] bool is_point_mass() const noexcept { return std::holds_alternative<PointMass>(params_); }
    [[nodiscard]] std::string describe() const;

    [[nodiscard]] double cdf(double x) const;
    /// Density; a point mass has none and throws DomainError.
    [[nodiscard]] double pdf(double x) const;
    /// Left-continuous inverse of the cdf; p must lie in (0,1).
    [[nodiscard]] double quantile(double p) const;
    [[nodiscard]] double mean() const;
    /// Closed support [lo, hi] (infinite ends allowed).
    [[nodiscard]] std::pair<double, double> support() const;

    [[nodiscard]] double draw(Rng& rng) const;

    /// E[g(X)] by adaptive quadrature against the density (exact for a point mass).
    [[nodiscard]] double expect(const std::function<double(double)>& g, double abs_tol = 1e-10) const;

    friend bool operator==(const UnivariateLaw&, const UnivariateLaw&);

private:
    Params params_;
};

bool operator==(const Uniform&, const Uniform&);
bool operator==(const Beta&, const Beta&);
bool operator==(const Normal&, const Normal&);
bool operator==(const Exponential&, const Exponential&);
bool operator==(const PointMass&, const PointMass&);

/// n i.i.d. draws, deterministic given the seed.
std::vector<double> sample(const UnivariateLaw& law, std::size_t n, SeedSpec seed);

using RealFn = std::function<double(double)>;

/// Y = f(X) + σ(X)·ε with ε drawn from `noise` (standard normal by default).
class ConditionalModel {
public:
    ConditionalModel(RealFn mean_fn, RealFn scale_fn, UnivariateLaw noise = UnivariateLaw::standard_normal());

    [[nodiscard]] double mean(double x) const { return mean_fn_(x); }
    /// σ(x); throws ParameterError when σ(x) ≤ 0 (or is not finite).
    [[nodiscard]] double scale(double x) const;
    [[nodiscard]] const UnivariateLaw& noise() const noexcept { return noise_; }
    [[nodiscard]] const RealFn& mean_fn() const noexcept { return mean_fn_; }
    [[nodiscard]] const RealFn& scale_fn() const noexcept { return scale_fn_; }

    [[nodiscard]] double draw_y(double x, Rng& rng) const;
    [[nodiscard]] double cdf_y(double x, double y) const;
    [[nodiscard]] double quantile_y(double x, double p) const;

    /// Checks σ > 0 on the given design points.
    void validate_scale(std::span<const double> xs) const;

private:
    RealFn mean_fn_;
    RealFn scale_fn_;
    UnivariateLaw noise_;
};

struct LabeledPoint {
    double x;
    double y;
};

/// n pairs with X from `design` and Y | X from `model`.
std::vector<LabeledPoint> sample_pairs(const UnivariateLaw& design, const ConditionalModel& model, std::size_t n,
                                       Rng& rng);

/// P(σ(X)|Z| ≤ r) = ∫ (2Φ(r/σ(x)) − 1) design(dx), by quadrature to 1e−10. Zero for r ≤ 0.
double mixture_residual_cdf(const UnivariateLaw& design, const RealFn& scale_fn, double r);

/// r with mixture_residual_cdf(r) = p, by bracketed bisection (200 iteration cap).
double mixture_residual_quantile(const UnivariateLaw& design, const RealFn& scale_fn, double p);

enum class QuantileRule {
    /// ⌈p(m+1)⌉-th order statistic, clamped to the maximum.
    Conformal,
    /// ⌈p·m⌉-th order statistic (inverse of the empirical cdf).
    InverseEcdf,
};

double empirical_quantile(std::span<const double> values, double p, QuantileRule rule = QuantileRule::Conformal);

/// 1-based order-statistic index selected by `rule` for m values at level p.
std::size_t order_statistic_index(std::size_t m, double p, QuantileRule rule);

/// TV(N(−a,1)^⊗n, N(a,1)^⊗n) = 2Φ(a√n) − 1.
double tv_gaussian_shift(double a, int n);

}  // namespace cbench::dist
