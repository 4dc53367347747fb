#include "cbench/extensionality.hpp"

#include "cbench/conformal.hpp"
#include "cbench/errors.hpp"
#include "cbench/special.hpp"

#include <cmath>
#include <vector>

namespace cbench::extensionality {

namespace {

struct Frequency {
    std::size_t hits = 0;
    std::size_t total = 0;
    [[nodiscard]] double value() const { return static_cast<double>(hits) / static_cast<double>(total); }
    [[nodiscard]] double se() const {
        const double p = value();
        return std::sqrt(p * (1.0 - p) / static_cast<double>(total));
    }
};

struct Moments {
    double sum = 0.0;
    double sum_sq = 0.0;
    std::size_t count = 0;
    void add(double v) {
        sum += v;
        sum_sq += v * v;
        ++count;
    }
    [[nodiscard]] double mean() const { return sum / static_cast<double>(count); }
    [[nodiscard]] double se() const {
        const double n = static_cast<double>(count);
        const double var = std::max(0.0, (sum_sq - sum * sum / n) / (n - 1.0));
        return std::sqrt(var / n);
    }
};

double conformal_quantile(std::vector<double>& values, double alpha) {
    return dist::empirical_quantile(values, 1.0 - alpha, dist::QuantileRule::Conformal);
}

}  // namespace

DesignPair heteroskedastic_pair(dist::RealFn scale) {
    auto model = std::make_shared<const dist::ConditionalModel>([](double) { return 0.0; }, std::move(scale));
    return DesignPair{dist::UnivariateLaw::uniform(0.0, 1.0), dist::UnivariateLaw::beta(2.0, 5.0), std::move(model)};
}

GapReport population_gap(const DesignPair& pair, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("population_gap: alpha must lie in (0,1)");
    if (!pair.conditional) throw ParameterError("population_gap: missing conditional model");
    const auto& scale = pair.conditional->scale_fn();
    GapReport out;
    out.alpha = alpha;
    out.q1 = dist::mixture_residual_quantile(pair.design_1, scale, 1.0 - alpha);
    out.q2 = pair.design_2 == pair.design_1 ? out.q1
                                            : dist::mixture_residual_quantile(pair.design_2, scale, 1.0 - alpha);
    out.gap = std::abs(out.q1 - out.q2);
    out.threshold = 0.5 * (out.q1 + out.q2);
    return out;
}

GapReport design_shift_population_gap(double alpha) { return population_gap(heteroskedastic_pair(), alpha); }

GapReport design_shift_monte_carlo(const DesignPair& pair, double alpha, std::size_t m, std::size_t reps, SeedSpec seed) {
    if (m < 2) throw ParameterError("design_shift_monte_carlo: m must be at least 2");
    if (reps < 1) throw ParameterError("design_shift_monte_carlo: reps must be at least 1");
    GapReport out = population_gap(pair, alpha);
    const double q_star = out.threshold;

    Frequency below[2], above[2];
    std::vector<double> residuals(m);
    const dist::UnivariateLaw* designs[2] = {&pair.design_1, &pair.design_2};
    for (int j = 0; j < 2; ++j) {
        const SeedSpec arm = seed.derive(static_cast<std::uint64_t>(j));
        for (std::size_t rep = 0; rep < reps; ++rep) {
            Rng rng(arm.derive(rep));
            for (double& r : residuals) {
                const double x = designs[j]->draw(rng);
                r = std::abs(pair.conditional->draw_y(x, rng));
            }
            const double q_hat = conformal_quantile(residuals, alpha);
            below[j].total = above[j].total = reps;
            if (q_hat < q_star) ++below[j].hits;
            if (q_hat > q_star) ++above[j].hits;
        }
    }

    MonteCarloGap mc;
    mc.m = m;
    mc.reps = reps;
    mc.below_1 = below[0].value();
    mc.above_1 = above[0].value();
    mc.below_2 = below[1].value();
    mc.above_2 = above[1].value();
    mc.se_below_1 = below[0].se();
    mc.se_above_1 = above[0].se();
    mc.se_below_2 = below[1].se();
    mc.se_above_2 = above[1].se();
    const bool first_higher = out.q1 >= out.q2;
    const Frequency& own1 = first_higher ? above[0] : below[0];
    const Frequency& own2 = first_higher ? below[1] : above[1];
    mc.own_side_1 = own1.value();
    mc.own_side_2 = own2.value();
    mc.se_own_side_1 = own1.se();
    mc.se_own_side_2 = own2.se();
    out.monte_carlo = mc;
    return out;
}

CqrTransportReport cqr_transport_experiment(const CqrTransportConfig& cfg, SeedSpec seed) {
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw ParameterError("cqr_transport: alpha must lie in (0,1)");
    if (cfg.n_cal < 2 || cfg.reps < 2) throw ParameterError("cqr_transport: n_cal and reps must be at least 2");
    if (cfg.band == CqrBand::FittedLocationShift && cfg.n_train < 2)
        throw ParameterError("cqr_transport: n_train must be at least 2");

    const dist::ConditionalModel model([](double x) { return x; }, cfg.scale);
    const dist::UnivariateLaw reference = dist::UnivariateLaw::uniform(0.0, 1.0);
    const dist::UnivariateLaw designs[2] = {reference, dist::UnivariateLaw::beta(5.0, 1.0)};
    const double z_lo = normal_quantile(0.5 * cfg.alpha);
    const double z_hi = normal_quantile(1.0 - 0.5 * cfg.alpha);

    Moments correction[2], width[2];
    std::size_t covered[2] = {0, 0};
    std::vector<double> train_residuals(cfg.n_train);
    for (std::size_t rep = 0; rep < cfg.reps; ++rep) {
        const SeedSpec rep_seed = seed.derive(rep);
        dist::RealFn lower;
        dist::RealFn upper;
        if (cfg.band == CqrBand::Oracle) {
            lower = [&model, z_lo](double x) { return x + model.scale(x) * z_lo; };
            upper = [&model, z_hi](double x) { return x + model.scale(x) * z_hi; };
        } else {
            Rng rng(rep_seed.derive(0));
            const auto train = dist::sample_pairs(reference, model, cfg.n_train, rng);
            double mx = 0.0, my = 0.0;
            for (const auto& p : train) {
                mx += p.x;
                my += p.y;
            }
            mx /= static_cast<double>(train.size());
            my /= static_cast<double>(train.size());
            double sxy = 0.0, sxx = 0.0;
            for (const auto& p : train) {
                sxy += (p.x - mx) * (p.y - my);
                sxx += (p.x - mx) * (p.x - mx);
            }
            const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
            const double intercept = my - slope * mx;
            for (std::size_t i = 0; i < train.size(); ++i)
                train_residuals[i] = train[i].y - (intercept + slope * train[i].x);
            const double c_lo = dist::empirical_quantile(train_residuals, 0.5 * cfg.alpha, dist::QuantileRule::InverseEcdf);
            const double c_hi =
                dist::empirical_quantile(train_residuals, 1.0 - 0.5 * cfg.alpha, dist::QuantileRule::InverseEcdf);
            lower = [=](double x) { return intercept + slope * x + c_lo; };
            upper = [=](double x) { return intercept + slope * x + c_hi; };
        }
        for (int j = 0; j < 2; ++j) {
            Rng rng(rep_seed.derive(1 + static_cast<std::uint64_t>(j)));
            const auto cal = dist::sample_pairs(designs[j], model, cfg.n_cal, rng);
            const auto test = dist::sample_pairs(designs[j], model, 1, rng).front();
            auto scores = conformal::cqr_scores(cal, lower, upper);
            const double q_hat = conformal_quantile(scores, cfg.alpha);
            const auto set = conformal::cqr_interval(lower, upper, scores, cfg.alpha, test.x);
            correction[j].add(q_hat);
            width[j].add(set.length());
            if (set.contains(test.y)) ++covered[j];
        }
    }

    auto arm = [&](int j) {
        CqrArm a;
        a.mean_correction = correction[j].mean();
        a.se_correction = correction[j].se();
        a.mean_width = width[j].mean();
        a.se_width = width[j].se();
        a.coverage = static_cast<double>(covered[j]) / static_cast<double>(cfg.reps);
        a.se_coverage = std::sqrt(a.coverage * (1.0 - a.coverage) / static_cast<double>(cfg.reps));
        return a;
    };
    CqrTransportReport out;
    out.uniform = arm(0);
    out.beta51 = arm(1);
    out.correction_difference = out.beta51.mean_correction - out.uniform.mean_correction;
    out.pooled_se = std::hypot(out.uniform.se_correction, out.beta51.se_correction);
    return out;
}

}  // namespace cbench::extensionality
