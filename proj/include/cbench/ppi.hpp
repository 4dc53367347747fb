#pragma once

#include "cbench/random.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace cbench::ppi {

/// Proxy slope β̃ = β + U with U ~ N(0, τ²).
struct ProxySlope {
    double beta_tilde = 0.0;
    double tau = 0.0;
};

struct LabeledSample {
    std::vector<double> x;
    std::vector<double> y;

    /// Throws ParameterError on size mismatch or n = 0; DomainError when Σx² = 0.
    void validate() const;
    [[nodiscard]] std::size_t size() const { return x.size(); }
};

struct BeliefStructure {
    double mean_y = 0.0;
    double mean_x = 0.0;
    double cov_yx = 0.0;
    double var_x = 1.0;
};

/// mean(proxy_unlabeled) + mean(y_labeled) − mean(proxy_labeled).
double ppi_mean_rectified(std::span<const double> proxy_unlabeled, std::span<const double> proxy_labeled,
                          std::span<const double> y_labeled);

/// β̃ + Σx(y − β̃x)/Σx².
double ppi_slope_corrected(const ProxySlope& proxy, const LabeledSample& sample);

double ppi_variance(double tau, double sigma, double n);
double full_variance(double sigma, double big_n);

struct InformationComparison {
    double ppi = 0.0;
    double full = 0.0;
    bool blackwell_inferior = false;
};

/// I_PPI = 1/τ² + n/σ² (infinite at τ = 0), I_full = N/σ².
InformationComparison information_compare(double tau, double sigma, double n, double big_n);

/// E[X²]/(E[X²] + λ)·β.
double ridge_population_slope(double ex2, double lambda, double beta);

/// σ² + (β − β̃)²·E[X²].
double residual_scale_expectation(double beta, double beta_tilde, double sigma, double ex2);

struct McMean {
    double mean = 0.0;
    double se = 0.0;
};

/// Mean of (Y − β̃X)² with X ~ N(0, ex2), Y = βX + σε.
McMean residual_scale_mc(double beta, double beta_tilde, double sigma, double ex2, std::size_t draws, SeedSpec seed);

double bayes_linear_adjust(const BeliefStructure& beliefs, double x_obs);

struct SlopeExperimentConfig {
    double beta = 1.0;
    double tau = 0.1;
    double sigma = 1.0;
    int n = 100;
    std::size_t reps = 100000;
};

struct SlopeExperimentReport {
    double mean = 0.0;
    double mean_se = 0.0;
    double variance = 0.0;
    double variance_se = 0.0;
    /// τ² + σ²/Σx² for the fixed design actually used.
    double conditional_variance = 0.0;
    /// τ² + σ²/n.
    double nominal_variance = 0.0;
    /// σ²/Σx². The proxy error cancels in the corrected slope, which equals the labeled OLS slope.
    double label_only_variance = 0.0;
    double sum_x2 = 0.0;
};

/// Fixed standard-normal design rescaled so that Σx² = n; U and ε redrawn per replicate.
SlopeExperimentReport ppi_slope_experiment(const SlopeExperimentConfig& cfg, SeedSpec seed);

struct PipelineSummary {
    double residual_mean = 0.0;
    double residual_mean_se = 0.0;
    double residual_variance = 0.0;
    double residual_variance_se = 0.0;
    double q_hat = 0.0;
    double q_hat_se = 0.0;
};

struct TwoPipelineReport {
    /// Proxy m_A = f.
    PipelineSummary a;
    /// Proxy m_B = 0.
    PipelineSummary b;
    double variance_difference = 0.0;
    double variance_difference_se = 0.0;
    double q_hat_difference = 0.0;
    double q_hat_difference_se = 0.0;
};

/// Y = f(X) + σε with X ~ Unif[0,1]. Both pipelines see the same draws in each replicate;
/// q̂ is the split-conformal absolute-residual quantile at α on n_cal points.
TwoPipelineReport two_pipeline_experiment(const std::function<double(double)>& f, double sigma, std::size_t reps,
                                          SeedSpec seed, std::size_t n_cal = 99, double alpha = 0.1);

}  // namespace cbench::ppi
