#include "cbench/ppi.hpp"

#include "cbench/dist.hpp"
#include "cbench/errors.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace cbench::ppi {

namespace {

double mean_of(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Sample mean and variance, plus the fourth central moment for the SE of the variance.
struct Accumulator {
    std::vector<double> values;
    void add(double v) { values.push_back(v); }
    [[nodiscard]] double mean() const { return mean_of(values); }
    [[nodiscard]] double variance() const {
        const double m = mean();
        double s = 0.0;
        for (double v : values) s += (v - m) * (v - m);
        return s / static_cast<double>(values.size() - 1);
    }
    [[nodiscard]] double mean_se() const { return std::sqrt(variance() / static_cast<double>(values.size())); }
    [[nodiscard]] double variance_se() const {
        const double m = mean();
        const double n = static_cast<double>(values.size());
        double m2 = 0.0, m4 = 0.0;
        for (double v : values) {
            const double d = (v - m) * (v - m);
            m2 += d;
            m4 += d * d;
        }
        m2 /= n;
        m4 /= n;
        return std::sqrt(std::max(0.0, m4 - m2 * m2) / n);
    }
};

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || std::isnan(v)) throw ParameterError(std::string(what) + " must be positive");
}

}  // namespace

void LabeledSample::validate() const {
    if (x.empty()) throw ParameterError("LabeledSample: need at least one labeled pair");
    if (x.size() != y.size()) throw ParameterError("LabeledSample: x and y lengths differ");
    double sxx = 0.0;
    for (double v : x) sxx += v * v;
    if (!(sxx > 0.0)) throw DomainError("LabeledSample: degenerate design, sum of x^2 is zero");
}

double ppi_mean_rectified(std::span<const double> proxy_unlabeled, std::span<const double> proxy_labeled,
                          std::span<const double> y_labeled) {
    if (proxy_unlabeled.empty() || proxy_labeled.empty() || y_labeled.empty()) {
        throw DomainError("ppi_mean_rectified: empty input");
    }
    if (proxy_labeled.size() != y_labeled.size()) {
        throw DomainError("ppi_mean_rectified: labeled proxies and labels differ in length");
    }
    return mean_of(proxy_unlabeled) + (mean_of(y_labeled) - mean_of(proxy_labeled));
}

double ppi_slope_corrected(const ProxySlope& proxy, const LabeledSample& sample) {
    sample.validate();
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        sxy += sample.x[i] * (sample.y[i] - proxy.beta_tilde * sample.x[i]);
        sxx += sample.x[i] * sample.x[i];
    }
    return proxy.beta_tilde + sxy / sxx;
}

double ppi_variance(double tau, double sigma, double n) { return tau * tau + sigma * sigma / n; }

double full_variance(double sigma, double big_n) { return sigma * sigma / big_n; }

InformationComparison information_compare(double tau, double sigma, double n, double big_n) {
    InformationComparison out;
    out.ppi = tau == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / (tau * tau) + n / (sigma * sigma);
    out.full = big_n / (sigma * sigma);
    out.blackwell_inferior = out.ppi < out.full;
    return out;
}

double ridge_population_slope(double ex2, double lambda, double beta) {
    require_positive(ex2, "ridge_population_slope: E[X^2]");
    if (lambda < 0.0) throw ParameterError("ridge_population_slope: lambda must be non-negative");
    return ex2 / (ex2 + lambda) * beta;
}

double residual_scale_expectation(double beta, double beta_tilde, double sigma, double ex2) {
    return sigma * sigma + (beta - beta_tilde) * (beta - beta_tilde) * ex2;
}

McMean residual_scale_mc(double beta, double beta_tilde, double sigma, double ex2, std::size_t draws, SeedSpec seed) {
    require_positive(sigma, "residual_scale_mc: sigma");
    require_positive(ex2, "residual_scale_mc: E[X^2]");
    if (draws < 2) throw ParameterError("residual_scale_mc: need at least two draws");
    Rng rng(seed);
    const double sd_x = std::sqrt(ex2);
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t i = 0; i < draws; ++i) {
        const double x = sd_x * rng.normal();
        const double y = beta * x + sigma * rng.normal();
        const double r = (y - beta_tilde * x) * (y - beta_tilde * x);
        sum += r;
        sum_sq += r * r;
    }
    const double n = static_cast<double>(draws);
    const double mean = sum / n;
    return {mean, std::sqrt(std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0)) / n)};
}

double bayes_linear_adjust(const BeliefStructure& beliefs, double x_obs) {
    require_positive(beliefs.var_x, "bayes_linear_adjust: Var(X)");
    return beliefs.mean_y + beliefs.cov_yx / beliefs.var_x * (x_obs - beliefs.mean_x);
}

SlopeExperimentReport ppi_slope_experiment(const SlopeExperimentConfig& cfg, SeedSpec seed) {
    if (cfg.n < 1) throw ParameterError("ppi_slope_experiment: n must be at least 1");
    if (cfg.reps < 2) throw ParameterError("ppi_slope_experiment: reps must be at least 2");
    if (cfg.tau < 0.0) throw ParameterError("ppi_slope_experiment: tau must be non-negative");
    require_positive(cfg.sigma, "ppi_slope_experiment: sigma");

    LabeledSample sample;
    sample.x.resize(static_cast<std::size_t>(cfg.n));
    sample.y.resize(sample.x.size());
    Rng design_rng(seed.derive(0));
    double sxx = 0.0;
    for (double& x : sample.x) {
        x = design_rng.normal();
        sxx += x * x;
    }
    const double rescale = std::sqrt(static_cast<double>(cfg.n) / sxx);
    sxx = 0.0;
    for (double& x : sample.x) {
        x *= rescale;
        sxx += x * x;
    }

    Accumulator acc;
    acc.values.reserve(cfg.reps);
    const SeedSpec rep_seed = seed.derive(1);
    for (std::size_t rep = 0; rep < cfg.reps; ++rep) {
        Rng rng(rep_seed.derive(rep));
        const ProxySlope proxy{cfg.beta + cfg.tau * rng.normal(), cfg.tau};
        for (std::size_t i = 0; i < sample.size(); ++i) sample.y[i] = cfg.beta * sample.x[i] + cfg.sigma * rng.normal();
        acc.add(ppi_slope_corrected(proxy, sample));
    }
    SlopeExperimentReport out;
    out.mean = acc.mean();
    out.mean_se = acc.mean_se();
    out.variance = acc.variance();
    out.variance_se = acc.variance_se();
    out.sum_x2 = sxx;
    out.conditional_variance = cfg.tau * cfg.tau + cfg.sigma * cfg.sigma / sxx;
    out.nominal_variance = ppi_variance(cfg.tau, cfg.sigma, cfg.n);
    out.label_only_variance = cfg.sigma * cfg.sigma / sxx;
    return out;
}

TwoPipelineReport two_pipeline_experiment(const std::function<double(double)>& f, double sigma, std::size_t reps,
                                          SeedSpec seed, std::size_t n_cal, double alpha) {
    require_positive(sigma, "two_pipeline_experiment: sigma");
    if (reps < 2) throw ParameterError("two_pipeline_experiment: reps must be at least 2");
    if (n_cal < 2) throw ParameterError("two_pipeline_experiment: n_cal must be at least 2");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("two_pipeline_experiment: alpha must lie in (0,1)");

    Accumulator mean_a, mean_b, var_a, var_b, q_a, q_b, var_diff, q_diff;
    std::vector<double> ra(n_cal), rb(n_cal), abs_a(n_cal), abs_b(n_cal);
    for (std::size_t rep = 0; rep < reps; ++rep) {
        Rng rng(seed.derive(rep));
        for (std::size_t i = 0; i < n_cal; ++i) {
            const double x = rng.uniform();
            const double fx = f(x);
            if (!std::isfinite(fx)) throw DomainError("two_pipeline_experiment: f is not finite on the design");
            const double y = fx + sigma * rng.normal();
            ra[i] = y - fx;
            rb[i] = y;
            abs_a[i] = std::abs(ra[i]);
            abs_b[i] = std::abs(rb[i]);
        }
        Accumulator ra_acc{ra}, rb_acc{rb};
        const double va = ra_acc.variance(), vb = rb_acc.variance();
        mean_a.add(ra_acc.mean());
        mean_b.add(rb_acc.mean());
        var_a.add(va);
        var_b.add(vb);
        var_diff.add(vb - va);
        const double qa = dist::empirical_quantile(abs_a, 1.0 - alpha, dist::QuantileRule::Conformal);
        const double qb = dist::empirical_quantile(abs_b, 1.0 - alpha, dist::QuantileRule::Conformal);
        q_a.add(qa);
        q_b.add(qb);
        q_diff.add(qb - qa);
    }
    auto summary = [](const Accumulator& m, const Accumulator& v, const Accumulator& q) {
        return PipelineSummary{m.mean(), m.mean_se(), v.mean(), v.mean_se(), q.mean(), q.mean_se()};
    };
    TwoPipelineReport out;
    out.a = summary(mean_a, var_a, q_a);
    out.b = summary(mean_b, var_b, q_b);
    out.variance_difference = var_diff.mean();
    out.variance_difference_se = var_diff.mean_se();
    out.q_hat_difference = q_diff.mean();
    out.q_hat_difference_se = q_diff.mean_se();
    return out;
}

}  // namespace cbench::ppi
