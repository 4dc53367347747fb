#include "cbench/runner.hpp"

#include "cbench/conformal.hpp"
#include "cbench/deficiency.hpp"
#include "cbench/dist.hpp"
#include "cbench/errors.hpp"
#include "cbench/events.hpp"
#include "cbench/extensionality.hpp"
#include "cbench/ppi.hpp"
#include "cbench/quadrature.hpp"
#include "cbench/rankgap.hpp"
#include "cbench/special.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>

namespace cbench::cli {

using diagnostics::assert_exceeds_by_se;
using diagnostics::assert_true;
using diagnostics::assert_within_se;
using diagnostics::ExperimentReport;
using diagnostics::Metric;

namespace {

// Fixed stream per experiment so that a run of one subcommand reproduces its rows inside `all`.
enum Stream : std::uint64_t {
    kCoverage = 1,
    kRanks,
    kExtensionality,
    kCqrTransport,
    kDeficiency,
    kPpi,
    kKernelDistance,
};

SeedSpec stream(const RunConfig& cfg, Stream s) { return SeedSpec{cfg.seed, s}; }

Metric exact_metric(std::string name, double estimate, double target) {
    return {std::move(name), estimate, std::nullopt, target, assert_within_se(estimate, target, std::nullopt, 0.0)};
}

Metric check(std::string name, double estimate, bool pass, std::optional<double> target = std::nullopt) {
    return {std::move(name), estimate, std::nullopt, target, assert_true(pass)};
}

Metric within(std::string name, double estimate, double se, double target, double k) {
    return {std::move(name), estimate, se, target, assert_within_se(estimate, target, se, k)};
}

Metric exceeds(std::string name, double estimate, double se, double target, double k) {
    return {std::move(name), estimate, se, target, assert_exceeds_by_se(estimate, target, se, k)};
}

// An event built from random breakpoints, half of them snapped to data values.
EventSet random_event(Rng& rng, std::span<const double> data) {
    const int pieces = 1 + static_cast<int>(rng() % 3);
    std::vector<double> points;
    for (int i = 0; i < 2 * pieces; ++i) {
        if (!data.empty() && rng.uniform() < 0.5) {
            points.push_back(data[rng() % data.size()]);
        } else {
            points.push_back(2.0 * rng.normal());
        }
    }
    std::sort(points.begin(), points.end());
    std::vector<HalfOpenInterval> out;
    for (std::size_t i = 0; i + 1 < points.size(); i += 2) out.push_back({points[i], points[i + 1]});
    if (rng.uniform() < 0.25) out.front().lo = -std::numeric_limits<double>::infinity();
    if (rng.uniform() < 0.25) out.back().hi = std::numeric_limits<double>::infinity();
    return EventSet(std::move(out));
}

std::vector<double> normal_data(Rng& rng, std::size_t n) {
    std::vector<double> v(n);
    for (double& y : v) y = rng.normal();
    return v;
}

std::vector<rankgap::KernelBuilder> random_kernel_families(Rng& rng, std::size_t count) {
    std::vector<rankgap::KernelBuilder> out;
    for (std::size_t i = 0; i < count; ++i) {
        if (rng.uniform() < 0.25) {
            out.emplace_back([](std::span<const double> d) { return rankgap::hill_bridge(d); });
        } else {
            const rankgap::ConjugatePrior prior{rng.normal(), 0.2 + 4.8 * rng.uniform()};
            const double noise = 0.5 + 1.5 * rng.uniform();
            out.emplace_back([prior, noise](std::span<const double> d) { return rankgap::bayes_predictive(prior, noise, d); });
        }
    }
    return out;
}

}  // namespace

void RunConfig::validate() const {
    const auto& names = subcommands();
    if (std::find(names.begin(), names.end(), subcommand) == names.end()) {
        throw ParameterError("unknown subcommand '" + subcommand + "'");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("alpha must lie in (0,1)");
    if (reps && *reps == 0) throw ParameterError("reps must be at least 1");
    if (n && *n < 1) throw ParameterError("n must be at least 1");
}

const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names = {"coverage",   "ranks", "extensionality", "cqr-transport",
                                                   "deficiency", "ppi",   "kernel-distance", "all"};
    return names;
}

std::filesystem::path default_out_dir() {
    if (const char* env = std::getenv("COHERENCE_BENCH_OUT"); env != nullptr && *env != '\0') return env;
    return "coherence-bench-out";
}

ExperimentReport run_coverage(const RunConfig& cfg) {
    const std::size_t n_cal = cfg.n_cal.value_or(99);
    const std::size_t reps = cfg.reps.value_or(10000);
    const std::size_t grid = cfg.grid_size.value_or(2001);
    ExperimentReport report("coverage", stream(cfg, kCoverage));
    report.set_parameter("alpha", cfg.alpha);
    report.set_parameter("n_cal", static_cast<double>(n_cal));
    report.set_parameter("reps", static_cast<double>(reps));
    report.set_parameter("grid_size", static_cast<double>(grid));
    report.set_parameter("model", "Y = X + (1 + X) eps, X ~ Unif[0,1]");

    const dist::ConditionalModel model([](double x) { return x; }, [](double x) { return 1.0 + x; });
    const auto design = dist::UnivariateLaw::uniform(0.0, 1.0);
    const double exact =
        static_cast<double>(dist::order_statistic_index(n_cal, 1.0 - cfg.alpha, dist::QuantileRule::Conformal)) /
        static_cast<double>(n_cal + 1);
    report.record("exact_rank_coverage", exact);

    const SeedSpec seed = report.seed();
    const auto split = conformal::coverage_audit(model, design, conformal::Method::Split, cfg.alpha, n_cal, reps,
                                                 seed.derive(0));
    report.add_metric(within("split_coverage", split.coverage, split.standard_error, exact, 3.0));

    const std::size_t side_reps = std::min<std::size_t>(reps, 2000);
    const auto full = conformal::coverage_audit(model, design, conformal::Method::Full, cfg.alpha, n_cal, side_reps,
                                                seed.derive(1), conformal::CoverageOptions{grid});
    report.add_metric(Metric{"full_coverage", full.coverage, full.standard_error, 1.0 - cfg.alpha,
                             assert_true(full.coverage >= 1.0 - cfg.alpha - 3.0 * full.standard_error)});
    const auto cqr = conformal::coverage_audit(model, design, conformal::Method::Cqr, cfg.alpha, n_cal, side_reps,
                                               seed.derive(2));
    report.add_metric(Metric{"cqr_coverage", cqr.coverage, cqr.standard_error, 1.0 - cfg.alpha,
                             assert_true(cqr.coverage >= 1.0 - cfg.alpha - 3.0 * cqr.standard_error)});
    return report;
}

ExperimentReport run_ranks(const RunConfig& cfg) {
    const int n = cfg.n.value_or(5);
    const std::size_t reps = cfg.reps.value_or(10000);
    const std::size_t grid = cfg.grid_size.value_or(2001);
    ExperimentReport report("ranks", stream(cfg, kRanks));
    report.set_parameter("n", static_cast<double>(n));
    report.set_parameter("reps", static_cast<double>(reps));
    const SeedSpec seed = report.seed();

    // Next-rank uniformity.
    const auto counts = rankgap::simulate_next_ranks(static_cast<std::size_t>(n), reps, seed.derive(0));
    const auto probs = rankgap::next_rank_distribution(static_cast<std::size_t>(n));
    const auto gof = diagnostics::chi_square_gof(counts, probs);
    report.record("next_rank_chi_square", gof.statistic);
    report.add_metric(check("next_rank_p_value", gof.p_value, gof.p_value > 0.001));

    // Full-conformal p-values on the order-statistic cells.
    std::size_t mismatches = 0, checked = 0;
    {
        Rng rng(seed.derive(1));
        const auto identity = conformal::ScoreRule::identity();
        for (int d = 0; d < 50; ++d) {
            const std::size_t size = 1 + rng() % 8;
            std::vector<dist::LabeledPoint> data(size);
            std::vector<double> ys(size);
            for (std::size_t i = 0; i < size; ++i) {
                ys[i] = rng.normal();
                data[i] = {rng.uniform(), ys[i]};
            }
            std::sort(ys.begin(), ys.end());
            const auto g = conformal::default_grid(data, grid);
            const auto p = conformal::full_conformal_p_values(data, identity, 0.5, g);
            for (std::size_t j = 0; j < g.size(); ++j) {
                if (std::binary_search(ys.begin(), ys.end(), g[j])) continue;
                const auto k = static_cast<std::size_t>(std::lower_bound(ys.begin(), ys.end(), g[j]) - ys.begin());
                const double expected = static_cast<double>(size - k + 1) / static_cast<double>(size + 1);
                ++checked;
                if (p[j] != expected) ++mismatches;
            }
        }
    }
    report.record("cell_p_values_checked", static_cast<double>(checked));
    report.add_metric(exact_metric("cell_p_value_mismatches", static_cast<double>(mismatches), 0.0));

    // Belief/plausibility duality on random frames with random rational masses.
    std::size_t duality_failures = 0;
    {
        Rng rng(seed.derive(2));
        for (int t = 0; t < 100; ++t) {
            const std::size_t size = 1 + rng() % 8;
            auto data = normal_data(rng, size);
            if (rng.uniform() < 0.3 && size > 1) data[1] = data[0];
            const auto cells = rankgap::order_cells(data);
            std::vector<std::int64_t> weights(cells.cell_count());
            std::int64_t total = 0;
            for (auto& w : weights) {
                w = static_cast<std::int64_t>(rng() % 7);
                total += w;
            }
            if (total == 0) {
                weights.front() = 1;
                total = 1;
            }
            std::vector<Rational> masses;
            for (auto w : weights) masses.emplace_back(w, total);
            const rankgap::RankGapMass mass(std::move(masses));
            const EventSet event = random_event(rng, data);
            const auto a = rankgap::belief_plausibility(mass, cells, event);
            const auto ac = rankgap::belief_plausibility(mass, cells, event.complement());
            if (!(a.belief + ac.plausibility == Rational(1)) || !(a.plausibility + ac.belief == Rational(1))) {
                ++duality_failures;
            }
        }
    }
    report.add_metric(exact_metric("belief_plausibility_duality_failures", static_cast<double>(duality_failures), 0.0));

    // Permutation invariance of the bridge builder.
    std::size_t invariance_failures = 0;
    {
        Rng rng(seed.derive(3));
        const rankgap::KernelBuilder builder = [](std::span<const double> d) { return rankgap::hill_bridge(d); };
        const auto data = normal_data(rng, 8);
        std::vector<std::size_t> perm(data.size());
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        for (int t = 0; t < 100; ++t) {
            std::shuffle(perm.begin(), perm.end(), rng);
            if (!rankgap::rank_invariance_check(builder, data, perm)) ++invariance_failures;
        }
    }
    report.add_metric(exact_metric("bridge_permutation_failures", static_cast<double>(invariance_failures), 0.0));
    return report;
}

ExperimentReport run_extensionality(const RunConfig& cfg) {
    const std::size_t m = cfg.m.value_or(400);
    const std::size_t reps = cfg.reps.value_or(2000);
    ExperimentReport report("extensionality", stream(cfg, kExtensionality));
    report.set_parameter("alpha", cfg.alpha);
    report.set_parameter("m", static_cast<double>(m));
    report.set_parameter("reps", static_cast<double>(reps));
    report.set_parameter("sigma", "1 + x");

    auto pair = extensionality::heteroskedastic_pair();
    if (cfg.identical_designs) pair.design_2 = pair.design_1;
    report.set_parameter("design_1", pair.design_1.describe());
    report.set_parameter("design_2", pair.design_2.describe());

    const auto gap = extensionality::design_shift_monte_carlo(pair, cfg.alpha, m, reps, report.seed());
    report.record("q1", gap.q1);
    report.record("q2", gap.q2);
    if (cfg.identical_designs) {
        report.add_metric(check("population_gap", gap.gap, std::abs(gap.gap) < 1e-7, 0.0));
    } else {
        report.add_metric(check("population_gap", gap.gap, gap.gap > 0.01));
    }

    auto control = extensionality::heteroskedastic_pair([](double) { return 1.0; });
    const auto homo = extensionality::population_gap(control, cfg.alpha);
    report.add_metric(check("homoskedastic_gap", homo.gap, std::abs(homo.gap) < 1e-7, 0.0));

    const auto& mc = *gap.monte_carlo;
    if (cfg.identical_designs) {
        report.record("below_design_1", mc.below_1, mc.se_below_1);
        report.record("above_design_2", mc.above_2, mc.se_above_2);
    } else {
        report.add_metric(exceeds("below_design_1", mc.below_1, mc.se_below_1, 0.0, 5.0));
        report.add_metric(exceeds("above_design_2", mc.above_2, mc.se_above_2, 0.0, 5.0));
    }
    report.record("own_side_design_1", mc.own_side_1, mc.se_own_side_1);
    report.record("own_side_design_2", mc.own_side_2, mc.se_own_side_2);
    return report;
}

ExperimentReport run_cqr_transport(const RunConfig& cfg) {
    extensionality::CqrTransportConfig tc;
    tc.alpha = cfg.alpha;
    if (cfg.n_cal) tc.n_cal = *cfg.n_cal;
    if (cfg.reps) tc.reps = *cfg.reps;
    ExperimentReport report("cqr-transport", stream(cfg, kCqrTransport));
    report.set_parameter("alpha", tc.alpha);
    report.set_parameter("n_train", static_cast<double>(tc.n_train));
    report.set_parameter("n_cal", static_cast<double>(tc.n_cal));
    report.set_parameter("reps", static_cast<double>(tc.reps));
    report.set_parameter("model", "Y = X + (0.5 + X) eps; Unif[0,1] vs Beta(5,1)");

    const auto fitted = extensionality::cqr_transport_experiment(tc, report.seed().derive(0));
    report.add_metric(exceeds("fitted_correction_difference", fitted.correction_difference, fitted.pooled_se, 0.0, 3.0));
    report.record("fitted_correction_uniform", fitted.uniform.mean_correction, fitted.uniform.se_correction);
    report.record("fitted_correction_beta51", fitted.beta51.mean_correction, fitted.beta51.se_correction);
    report.record("fitted_width_uniform", fitted.uniform.mean_width, fitted.uniform.se_width);
    report.record("fitted_width_beta51", fitted.beta51.mean_width, fitted.beta51.se_width);
    const double target = 1.0 - tc.alpha;
    for (const auto& [name, arm] : {std::pair{"fitted_coverage_uniform", fitted.uniform},
                                    std::pair{"fitted_coverage_beta51", fitted.beta51}}) {
        report.add_metric(
            Metric{name, arm.coverage, arm.se_coverage, target, assert_true(arm.coverage >= target - 3.0 * arm.se_coverage)});
    }

    tc.band = extensionality::CqrBand::Oracle;
    const auto oracle = extensionality::cqr_transport_experiment(tc, report.seed().derive(1));
    report.record("oracle_correction_difference", oracle.correction_difference, oracle.pooled_se);
    report.record("oracle_coverage_uniform", oracle.uniform.coverage, oracle.uniform.se_coverage);
    report.record("oracle_coverage_beta51", oracle.beta51.coverage, oracle.beta51.se_coverage);
    return report;
}

ExperimentReport run_deficiency(const RunConfig& cfg) {
    const double a = cfg.a.value_or(0.5);
    const int n = cfg.n.value_or(4);
    const std::size_t reps = cfg.reps.value_or(20000);
    ExperimentReport report("deficiency", stream(cfg, kDeficiency));
    report.set_parameter("a", a);
    report.set_parameter("n", static_cast<double>(n));
    report.set_parameter("reps", static_cast<double>(reps));
    const SeedSpec seed = report.seed();

    // Closed-form TV against quadrature of the sufficient statistic's densities.
    double worst = 0.0;
    for (double shift : {0.1, 0.5, 1.0, 2.0}) {
        for (int size : {1, 4, 16}) {
            const double sd = 1.0 / std::sqrt(static_cast<double>(size));
            auto excess = [shift, sd](double t) {
                const double plus = normal_pdf((t - shift) / sd) / sd;
                const double minus = normal_pdf((t + shift) / sd) / sd;
                return std::max(0.0, plus - minus);
            };
            // The + density dominates exactly on t > 0.
            const double quad = integrate(excess, 0.0, shift + 40.0 * sd).value;
            worst = std::max(worst, std::abs(dist::tv_gaussian_shift(shift, size) - quad));
        }
    }
    report.add_metric(check("tv_max_abs_error", worst, worst <= 1e-6, 0.0));

    const auto risks = deficiency::gaussian_testing_risks(a, n, reps, seed.derive(0));
    report.record("tv", dist::tv_gaussian_shift(a, n));
    report.record("deficiency_lower_bound", deficiency::deficiency_lower_bound(a, n));
    report.add_metric(within("full_data_risk", risks.full_risk_estimate, risks.full_risk_se, risks.closed_form_full_risk, 3.0));
    report.add_metric(within("rank_rule_risk", risks.rank_risk_estimate, risks.rank_risk_se, 0.5, 3.0));
    report.add_metric(within("constant_rule_risk", risks.constant_risk_estimate, risks.constant_risk_se, 0.5, 3.0));
    if (n <= 6) report.add_metric(exact_metric("rank_rule_risk_enumerated", risks.rank_risk_enumerated, 0.5));

    const std::array<double, 3> thetas{-2.0, 0.0, 2.0};
    const auto loc = deficiency::rank_ancillarity_check(thetas, 3, std::max<std::size_t>(reps / 2, 1000), seed.derive(1));
    report.add_metric(check("rank_ancillarity_location_p_value", loc.p_value, loc.p_value > 0.001));
    const auto scl = deficiency::rank_ancillarity_check(thetas, 3, std::max<std::size_t>(reps / 2, 1000), seed.derive(2),
                                                        deficiency::Family::Scale);
    report.add_metric(check("rank_ancillarity_scale_p_value", scl.p_value, scl.p_value > 0.001));

    const auto mm = deficiency::rank_minimax_location(2.0, 25, reps, seed.derive(3));
    report.add_metric(exact_metric("rank_only_lower_bound", mm.rank_only_lower_bound, 4.0));
    report.add_metric(exact_metric("full_data_minimax_risk", mm.full_data_risk, 0.04));
    report.add_metric(within("sample_mean_risk", mm.mean_risk_estimate, mm.mean_risk_se, mm.full_data_risk, 3.0));
    report.add_metric(check("constant_worst_risk", mm.constant_worst_risk, mm.constant_worst_risk >= mm.rank_only_lower_bound,
                            mm.rank_only_lower_bound));
    report.add_metric(within("rank_estimator_worst_risk", mm.rank_estimator_worst_risk, mm.rank_estimator_worst_se,
                             mm.rank_estimator_variance + 4.0, 3.0));

    const auto w = deficiency::exp_family_rank_witness();
    report.add_metric(check("witness_ranks_equal", w.ranks_equal ? 1.0 : 0.0, w.ranks_equal));
    report.record("witness_sum_first", w.sum_first);
    report.record("witness_sum_second", w.sum_second);
    report.add_metric(check("witness_likelihood_ratios_differ", w.likelihood_ratios_differ ? 1.0 : 0.0,
                            w.likelihood_ratios_differ));
    return report;
}

ExperimentReport run_ppi(const RunConfig& cfg) {
    ppi::SlopeExperimentConfig sc;
    sc.tau = cfg.tau.value_or(0.1);
    sc.sigma = cfg.sigma.value_or(1.0);
    sc.n = cfg.n.value_or(100);
    sc.reps = cfg.reps.value_or(100000);
    const double big_n = 10000.0;
    ExperimentReport report("ppi", stream(cfg, kPpi));
    report.set_parameter("beta", sc.beta);
    report.set_parameter("tau", sc.tau);
    report.set_parameter("sigma", sc.sigma);
    report.set_parameter("n", static_cast<double>(sc.n));
    report.set_parameter("N", big_n);
    report.set_parameter("reps", static_cast<double>(sc.reps));
    const SeedSpec seed = report.seed();

    const auto slope = ppi::ppi_slope_experiment(sc, seed.derive(0));
    report.add_metric(within("slope_mean", slope.mean, slope.mean_se, sc.beta, 3.0));
    report.add_metric(Metric{"slope_variance", slope.variance, slope.variance_se, slope.conditional_variance,
                             assert_true(std::abs(slope.variance - slope.conditional_variance) <=
                                         0.05 * slope.conditional_variance)});
    report.record("nominal_variance", slope.nominal_variance);
    report.add_metric(Metric{"slope_variance_label_only", slope.variance, slope.variance_se, slope.label_only_variance,
                             assert_true(std::abs(slope.variance - slope.label_only_variance) <=
                                         0.05 * slope.label_only_variance)});
    report.record("design_sum_x2", slope.sum_x2);

    const auto info = ppi::information_compare(sc.tau, sc.sigma, sc.n, big_n);
    const double expected_ppi = 1.0 / (sc.tau * sc.tau) + sc.n / (sc.sigma * sc.sigma);
    report.add_metric(exact_metric("information_ppi", info.ppi, expected_ppi));
    report.add_metric(exact_metric("information_full", info.full, big_n / (sc.sigma * sc.sigma)));
    report.add_metric(check("blackwell_inferior", info.blackwell_inferior ? 1.0 : 0.0,
                            info.blackwell_inferior == (expected_ppi < big_n / (sc.sigma * sc.sigma))));

    const double slope_wide = ppi::ridge_population_slope(4.0, 1.0, 1.0);
    const double slope_narrow = ppi::ridge_population_slope(1.0, 1.0, 1.0);
    report.add_metric(exact_metric("ridge_slope_ex2_4", slope_wide, 0.8));
    report.add_metric(exact_metric("ridge_slope_ex2_1", slope_narrow, 0.5));

    for (const auto& [name, ex2, stream_id] : {std::tuple{"residual_scale_ex2_1", 1.0, 1}, std::tuple{"residual_scale_ex2_4", 4.0, 2}}) {
        const double target = ppi::residual_scale_expectation(1.0, 0.5, 1.0, ex2);
        const auto mc = ppi::residual_scale_mc(1.0, 0.5, 1.0, ex2, 100000, seed.derive(stream_id));
        report.add_metric(Metric{name, mc.mean, mc.se, target, assert_true(std::abs(mc.mean - target) <= 0.02 * target)});
    }

    const std::size_t pipeline_reps = std::min<std::size_t>(sc.reps, 2000);
    const auto pipes = ppi::two_pipeline_experiment([](double x) { return 2.0 * x; }, 1.0, pipeline_reps, seed.derive(3));
    report.add_metric(within("pipeline_variance_difference", pipes.variance_difference, pipes.variance_difference_se,
                             1.0 / 3.0, 3.0));
    report.record("pipeline_q_hat_a", pipes.a.q_hat, pipes.a.q_hat_se);
    report.record("pipeline_q_hat_b", pipes.b.q_hat, pipes.b.q_hat_se);
    report.add_metric(check("pipeline_q_hat_difference", pipes.q_hat_difference, pipes.q_hat_difference >= 0.0));
    return report;
}

ExperimentReport run_kernel_distance(const RunConfig& cfg) {
    const int n = cfg.n.value_or(5);
    const std::size_t mc = cfg.reps.value_or(4000);
    ExperimentReport report("kernel-distance", stream(cfg, kKernelDistance));
    report.set_parameter("n", static_cast<double>(n));
    report.set_parameter("mc_size", static_cast<double>(mc));
    const SeedSpec seed = report.seed();

    rankgap::KernelMetricConfig metric;
    metric.mc_size = mc;
    const std::vector<rankgap::KernelBuilder> pair = {
        [](std::span<const double> d) { return rankgap::hill_bridge(d); },
        [](std::span<const double> d) { return rankgap::bayes_predictive({0.0, 1.0}, 1.0, d); },
        [](std::span<const double> d) { return rankgap::hill_bridge(d); },
    };
    const rankgap::KernelFeatureSample features(pair, static_cast<std::size_t>(n), metric, seed.derive(0));
    const auto self = features.distance(0, 2);
    report.add_metric(exact_metric("self_distance", self.estimate, 0.0));
    const auto sep = features.distance(0, 1);
    report.add_metric(exceeds("bridge_vs_conjugate", sep.estimate, sep.standard_error, 0.0, 5.0));

    std::size_t triangle_failures = 0;
    double worst_slack = -std::numeric_limits<double>::infinity();
    {
        Rng rng(seed.derive(1));
        rankgap::KernelMetricConfig small = metric;
        small.mc_size = std::min<std::size_t>(mc, 1000);
        for (std::uint64_t t = 0; t < 20; ++t) {
            const auto families = random_kernel_families(rng, 3);
            const rankgap::KernelFeatureSample fs(families, static_cast<std::size_t>(n), small, seed.derive(2).derive(t));
            const auto ab = fs.distance(0, 1), bc = fs.distance(1, 2), ac = fs.distance(0, 2);
            const double pooled = std::sqrt(ab.standard_error * ab.standard_error + bc.standard_error * bc.standard_error +
                                            ac.standard_error * ac.standard_error);
            const double slack = ac.estimate - ab.estimate - bc.estimate - 3.0 * pooled;
            worst_slack = std::max(worst_slack, slack);
            if (slack > 0.0) ++triangle_failures;
        }
    }
    report.record("triangle_worst_slack", worst_slack);
    report.add_metric(exact_metric("triangle_failures", static_cast<double>(triangle_failures), 0.0));

    std::size_t probe_failures = 0;
    {
        Rng rng(seed.derive(3));
        for (int variant = 0; variant < 2; ++variant) {
            for (int t = 0; t < 100; ++t) {
                const auto data = normal_data(rng, 2 + rng() % 7);
                const auto kernel = variant == 0 ? rankgap::hill_bridge(data)
                                                 : rankgap::bayes_predictive({rng.normal(), 0.2 + 4.8 * rng.uniform()},
                                                                             0.5 + 1.5 * rng.uniform(), data);
                const EventSet event = random_event(rng, data);
                diagnostics::FinitePartition partition;
                // Cuts at kernel quantiles of levels at least 0.02 apart keep every cell's mass positive.
                const std::size_t cuts = 1 + rng() % 5;
                std::vector<double> levels;
                for (std::size_t c = 0; c < cuts; ++c) levels.push_back(0.02 * static_cast<double>(1 + rng() % 49));
                std::sort(levels.begin(), levels.end());
                levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
                for (double u : levels) partition.cuts.push_back(kernel.quantile(u));
                partition.cuts.erase(std::unique(partition.cuts.begin(), partition.cuts.end()), partition.cuts.end());
                if (!diagnostics::conglomerability_probe(kernel, event, partition).within) ++probe_failures;
            }
        }
    }
    report.add_metric(exact_metric("conglomerability_failures", static_cast<double>(probe_failures), 0.0));
    return report;
}

std::vector<ExperimentReport> run_experiments(const RunConfig& cfg) {
    cfg.validate();
    using Runner = ExperimentReport (*)(const RunConfig&);
    const std::vector<std::pair<std::string, Runner>> table = {
        {"coverage", run_coverage},     {"ranks", run_ranks}, {"extensionality", run_extensionality},
        {"cqr-transport", run_cqr_transport}, {"deficiency", run_deficiency}, {"ppi", run_ppi},
        {"kernel-distance", run_kernel_distance},
    };
    std::vector<ExperimentReport> out;
    for (const auto& [name, fn] : table) {
        if (cfg.subcommand == "all" || cfg.subcommand == name) out.push_back(fn(cfg));
    }
    return out;
}

void write_reports(const std::vector<ExperimentReport>& reports, const std::filesystem::path& out_dir,
                   OutputFormat format) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + out_dir.string() + ": " + ec.message());
    auto write = [](const std::filesystem::path& path, const std::string& text) {
        std::ofstream os(path, std::ios::binary | std::ios::trunc);
        if (!os) throw IoError("cannot open " + path.string() + " for writing");
        os << text;
        os.close();
        if (!os) throw IoError("write failed for " + path.string());
    };
    for (const auto& r : reports) {
        if (format != OutputFormat::Json) write(out_dir / (r.experiment_id() + ".csv"), r.to_csv());
        if (format != OutputFormat::Csv) write(out_dir / (r.experiment_id() + ".json"), r.to_json());
    }
}

int run(const RunConfig& cfg, std::ostream& log) {
    std::vector<ExperimentReport> reports;
    try {
        reports = run_experiments(cfg);
    } catch (const ParameterError& e) {
        log << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        log << "FAIL " << cfg.subcommand << ": " << e.what() << '\n';
        return kExitAssertionFailure;
    }
    const auto out_dir = cfg.out_dir.empty() ? default_out_dir() : cfg.out_dir;
    try {
        write_reports(reports, out_dir, cfg.format);
    } catch (const IoError& e) {
        log << "error: " << e.what() << '\n';
        return kExitIo;
    }
    bool ok = true;
    for (const auto& r : reports) {
        log << (r.all_passed() ? "PASS " : "FAIL ") << r.experiment_id() << " (" << r.failures() << " failed of "
            << r.metrics().size() << " metrics)\n";
        ok = ok && r.all_passed();
    }
    return ok ? kExitPass : kExitAssertionFailure;
}

}  // namespace cbench::cli
