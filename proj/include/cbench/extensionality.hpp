#pragma once

#include "cbench/dist.hpp"
#include "cbench/random.hpp"

#include <cstddef>
#include <memory>
#include <optional>

namespace cbench::extensionality {

/// Two covariate designs sharing one conditional law P(Y|X).
struct DesignPair {
    dist::UnivariateLaw design_1;
    dist::UnivariateLaw design_2;
    std::shared_ptr<const dist::ConditionalModel> conditional;
};

/// Y | X = x ~ N(0, σ(x)²) with σ(x) = 1 + x (or the supplied scale), X ~ Unif[0,1] vs Beta(2,5).
DesignPair heteroskedastic_pair(dist::RealFn scale = [](double x) { return 1.0 + x; });

struct MonteCarloGap {
    std::size_t m = 0;
    std::size_t reps = 0;
    /// Frequencies of {q̂ < q*} and {q̂ > q*} under each design, with binomial standard errors.
    double below_1 = 0.0, above_1 = 0.0, below_2 = 0.0, above_2 = 0.0;
    double se_below_1 = 0.0, se_above_1 = 0.0, se_below_2 = 0.0, se_above_2 = 0.0;
    /// Frequency with which each design's q̂ lands on its own population quantile's side of q*.
    double own_side_1 = 0.0, own_side_2 = 0.0;
    double se_own_side_1 = 0.0, se_own_side_2 = 0.0;
};

struct GapReport {
    double alpha = 0.1;
    double q1 = 0.0;
    double q2 = 0.0;
    double gap = 0.0;
    /// Midpoint (q1 + q2)/2.
    double threshold = 0.0;
    std::optional<MonteCarloGap> monte_carlo;
};

/// Population (1−α) quantiles of |Y| (fit f̂ ≡ 0) under each design, by quadrature and bisection.
/// The conditional model must have zero mean and standard normal noise.
GapReport population_gap(const DesignPair& pair, double alpha);

/// The σ(x) = 1 + x, Unif[0,1] vs Beta(2,5) instance.
GapReport design_shift_population_gap(double alpha);

/// Population gap plus, per design, `reps` replicates of the conformal empirical quantile of m
/// calibration residuals |Y_i| compared against the midpoint threshold.
GapReport design_shift_monte_carlo(const DesignPair& pair, double alpha, std::size_t m, std::size_t reps, SeedSpec seed);

enum class CqrBand {
    /// q̂_τ(x) = x + (0.5 + x)Φ⁻¹(τ), the true conditional quantiles.
    Oracle,
    /// Location-shift quantile regression fitted per replicate on n_train points from Unif[0,1]:
    /// an OLS line plus empirical α/2 and 1−α/2 quantiles of its residuals.
    FittedLocationShift,
};

struct CqrTransportConfig {
    double alpha = 0.1;
    std::size_t n_train = 1000;
    std::size_t n_cal = 500;
    std::size_t reps = 500;
    CqrBand band = CqrBand::FittedLocationShift;
    /// σ(x) in Y = X + σ(X)ε.
    dist::RealFn scale = [](double x) { return 0.5 + x; };
};

struct CqrArm {
    double mean_correction = 0.0;
    double se_correction = 0.0;
    double mean_width = 0.0;
    double se_width = 0.0;
    double coverage = 0.0;
    double se_coverage = 0.0;
};

struct CqrTransportReport {
    CqrArm uniform;
    CqrArm beta51;
    /// beta51.mean_correction − uniform.mean_correction and √(se₁² + se₂²).
    double correction_difference = 0.0;
    double pooled_se = 0.0;
};

/// CQR calibration under X ~ Unif[0,1] and X ~ Beta(5,1) with a shared conditional law.
CqrTransportReport cqr_transport_experiment(const CqrTransportConfig& cfg, SeedSpec seed);

}  // namespace cbench::extensionality
