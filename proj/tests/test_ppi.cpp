#include "cbench/errors.hpp"
#include "cbench/ppi.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace cbench;
using namespace cbench::ppi;

TEST(RectifiedMean, Examples) {
    const std::vector<double> unl{1.0, 2.0, 3.0}, lab{2.0, 4.0}, y{2.0, 4.0};
    EXPECT_DOUBLE_EQ(ppi_mean_rectified(unl, lab, y), 2.0);  // perfect proxy: zero correction
    const std::vector<double> zeros_u{0.0, 0.0}, zeros_l{0.0, 0.0};
    EXPECT_DOUBLE_EQ(ppi_mean_rectified(zeros_u, zeros_l, y), 3.0);  // labeled mean
    EXPECT_DOUBLE_EQ(ppi_mean_rectified(std::vector<double>{1.0, 1.0}, std::vector<double>{2.0},
                                        std::vector<double>{3.0}),
                     2.0);
    EXPECT_THROW(ppi_mean_rectified(std::vector<double>{}, lab, y), DomainError);
    EXPECT_THROW(ppi_mean_rectified(unl, lab, std::vector<double>{1.0}), DomainError);
}

TEST(CorrectedSlope, EqualsLabeledOls) {
    const LabeledSample s{{1.0, -2.0, 0.5, 3.0}, {0.7, -1.1, 0.9, 2.2}};
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        sxy += s.x[i] * s.y[i];
        sxx += s.x[i] * s.x[i];
    }
    for (double bt : {-5.0, 0.0, 0.3, 17.0}) EXPECT_NEAR(ppi_slope_corrected({bt, 0.1}, s), sxy / sxx, 1e-12);

    const LabeledSample noiseless{{1.0, 2.0, -1.0}, {2.5, 5.0, -2.5}};
    for (double bt : {-3.0, 2.5, 9.0}) EXPECT_NEAR(ppi_slope_corrected({bt, 0.0}, noiseless), 2.5, 1e-12);

    EXPECT_THROW(ppi_slope_corrected({1.0, 0.1}, LabeledSample{{0.0, 0.0}, {1.0, 2.0}}), DomainError);
    EXPECT_THROW(ppi_slope_corrected({1.0, 0.1}, LabeledSample{{1.0}, {1.0, 2.0}}), ParameterError);
    EXPECT_THROW(ppi_slope_corrected({1.0, 0.1}, LabeledSample{}), ParameterError);
}

TEST(SlopeExperiment, UnbiasedOverGrid) {
    std::uint64_t s = 0;
    for (double beta : {-1.0, 0.0, 2.0}) {
        for (double tau : {0.0, 0.1, 1.0}) {
            SlopeExperimentConfig cfg;
            cfg.beta = beta;
            cfg.tau = tau;
            cfg.reps = 5000;
            const auto r = ppi_slope_experiment(cfg, SeedSpec{81, s++});
            EXPECT_NEAR(r.mean, beta, 3.0 * r.mean_se) << beta << " " << tau;
        }
    }
}

TEST(SlopeExperiment, VarianceIsLabelOnly) {
    SlopeExperimentConfig cfg;
    cfg.reps = 20000;
    const auto r = ppi_slope_experiment(cfg, SeedSpec{82, 0});
    EXPECT_NEAR(r.sum_x2, 100.0, 1e-9);
    EXPECT_NEAR(r.nominal_variance, 0.02, 1e-15);
    EXPECT_NEAR(r.conditional_variance, 0.01 + 1.0 / r.sum_x2, 1e-15);
    EXPECT_NEAR(r.label_only_variance, 1.0 / r.sum_x2, 1e-15);
    EXPECT_NEAR(r.variance, r.label_only_variance, 0.05 * r.label_only_variance);

    // The proxy noise level has no effect on the corrected slope's spread.
    cfg.tau = 5.0;
    const auto wide = ppi_slope_experiment(cfg, SeedSpec{82, 0});
    EXPECT_NEAR(wide.variance, r.variance, 1e-12);
}

TEST(ClosedForms, VarianceAndInformation) {
    EXPECT_NEAR(ppi_variance(0.1, 1.0, 100), 0.02, 1e-15);
    EXPECT_NEAR(full_variance(1.0, 1e4), 1e-4, 1e-18);
    const auto c = information_compare(0.1, 1.0, 100, 1e4);
    EXPECT_NEAR(c.ppi, 200.0, 1e-9);
    EXPECT_EQ(c.full, 1e4);
    EXPECT_TRUE(c.blackwell_inferior);
    EXPECT_EQ(information_compare(0.0, 1.0, 100, 1e4).ppi, std::numeric_limits<double>::infinity());
    EXPECT_FALSE(information_compare(0.0, 1.0, 100, 1e4).blackwell_inferior);
    EXPECT_FALSE(information_compare(100.0, 1.0, 100, 100).blackwell_inferior);
}

TEST(ClosedForms, RidgeAndResidualScale) {
    EXPECT_DOUBLE_EQ(ridge_population_slope(4.0, 1.0, 1.0), 0.8);
    EXPECT_DOUBLE_EQ(ridge_population_slope(1.0, 1.0, 1.0), 0.5);
    EXPECT_DOUBLE_EQ(ridge_population_slope(3.0, 0.0, 1.0), 1.0);
    EXPECT_DOUBLE_EQ(residual_scale_expectation(1.0, 0.5, 1.0, 1.0), 1.25);
    EXPECT_DOUBLE_EQ(residual_scale_expectation(1.0, 0.5, 1.0, 4.0), 2.0);
    for (double ex2 : {1.0, 4.0}) {
        const auto mc = residual_scale_mc(1.0, 0.5, 1.0, ex2, 100000, SeedSpec{83, static_cast<std::uint64_t>(ex2)});
        const double target = residual_scale_expectation(1.0, 0.5, 1.0, ex2);
        EXPECT_LE(std::abs(mc.mean - target), 0.02 * target);
    }
}

TEST(ClosedForms, BayesLinearIsAffine) {
    const BeliefStructure b{1.0, 0.0, 2.0, 4.0};
    EXPECT_DOUBLE_EQ(bayes_linear_adjust(b, 2.0), 2.0);
    const double h = 0.5;
    for (double x : {-3.0, 0.0, 1.0, 7.0}) {
        const double d2 = bayes_linear_adjust(b, x + h) - 2.0 * bayes_linear_adjust(b, x) + bayes_linear_adjust(b, x - h);
        EXPECT_NEAR(d2, 0.0, 1e-12);
    }
}

TEST(TwoPipelines, Examples) {
    const auto same = two_pipeline_experiment([](double) { return 0.0; }, 1.0, 300, SeedSpec{84, 0});
    EXPECT_EQ(same.q_hat_difference, 0.0);
    EXPECT_EQ(same.variance_difference, 0.0);

    const auto lin = two_pipeline_experiment([](double x) { return 2.0 * x; }, 1.0, 2000, SeedSpec{84, 1});
    EXPECT_NEAR(lin.variance_difference, 1.0 / 3.0, 3.0 * lin.variance_difference_se);
    EXPECT_GE(lin.q_hat_difference, 0.0);

    const auto shifted = two_pipeline_experiment([](double) { return 50.0; }, 1.0, 200, SeedSpec{84, 2});
    EXPECT_NEAR(shifted.b.q_hat, 50.0, 3.0);
    EXPECT_LT(shifted.a.q_hat, 3.0);
}
