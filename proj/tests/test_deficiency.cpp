#include "cbench/deficiency.hpp"
#include "cbench/errors.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

using namespace cbench;
using namespace cbench::deficiency;

TEST(Ranks, VectorAndPatternIndex) {
    EXPECT_EQ(rank_vector(std::vector<double>{3.0, 1.0, 2.0}), (RankVector{3, 1, 2}));
    EXPECT_EQ(pattern_index(RankVector{1, 2, 3}), 0u);
    EXPECT_EQ(pattern_index(RankVector{3, 2, 1}), 5u);
    RankVector r{1, 2, 3, 4};
    std::size_t expected = 0;
    do {
        EXPECT_EQ(pattern_index(r), expected++);
    } while (std::next_permutation(r.begin(), r.end()));
    EXPECT_EQ(factorial(6), 720u);
}

TEST(TestingRisks, ClosedForm) {
    const auto r = gaussian_testing_risks(1.0, 1, 100, SeedSpec{71, 0});
    EXPECT_NEAR(r.closed_form_full_risk, 0.158655253931457, 1e-12);
    EXPECT_NEAR(r.closed_form_full_risk, 0.5 * (1.0 - oracle::tv_shift(1.0, 1)), 1e-9);
    EXPECT_NEAR(gaussian_testing_risks(1e-9, 1, 10, SeedSpec{71, 1}).closed_form_full_risk, 0.5, 1e-8);
    EXPECT_THROW(gaussian_testing_risks(0.0, 1, 10, SeedSpec{71, 1}), ParameterError);
    EXPECT_THROW(gaussian_testing_risks(1.0, 0, 10, SeedSpec{71, 1}), ParameterError);
}

TEST(TestingRisks, MonteCarloAtA1N4) {
    const auto r = gaussian_testing_risks(1.0, 4, 100000, SeedSpec{71, 2});
    EXPECT_NEAR(r.closed_form_full_risk, 0.0227501319481792, 1e-12);
    EXPECT_NEAR(r.full_risk_estimate, r.closed_form_full_risk, 3.0 * r.full_risk_se);
    EXPECT_NEAR(r.rank_risk_estimate, 0.5, 3.0 * r.rank_risk_se);
    EXPECT_NEAR(r.constant_risk_estimate, 0.5, 3.0 * r.constant_risk_se);
    EXPECT_EQ(r.rank_risk_enumerated, 0.5);
}

TEST(TestingRisks, GridAgreementAndRankFloor) {
    std::uint64_t s = 0;
    // a√n ≤ 2 keeps the full-data risk large enough to observe errors at this replicate count.
    for (double a : {0.5, 1.0, 2.0}) {
        for (int n : {1, 4}) {
            if (a * std::sqrt(n) > 2.0) continue;
            const auto r = gaussian_testing_risks(a, n, 20000, SeedSpec{72, s++});
            EXPECT_NEAR(r.full_risk_estimate, r.closed_form_full_risk, 3.0 * r.full_risk_se) << a << " " << n;
            EXPECT_GE(r.rank_risk_estimate, 0.5 - 3.0 * r.rank_risk_se);
            EXPECT_GE(r.constant_risk_estimate, 0.5 - 3.0 * r.constant_risk_se);
        }
    }
    EXPECT_TRUE(std::isnan(gaussian_testing_risks(1.0, 8, 10, SeedSpec{72, 99}).rank_risk_enumerated));
}

TEST(DeficiencyBound, Values) {
    EXPECT_NEAR(deficiency_lower_bound(1.0, 1), 0.341344746068543, 1e-12);
    EXPECT_NEAR(deficiency_lower_bound(2.0, 1), 0.477249868051821, 1e-12);
    EXPECT_LT(deficiency_lower_bound(1e-12, 9), 1e-11);
    double prev_a = 0.0;
    for (double a = 0.05; a <= 3.0; a += 0.05) {
        double prev_n = 0.0;
        for (int n = 1; n <= 20; ++n) {
            const double d = deficiency_lower_bound(a, n);
            ASSERT_GE(d, prev_n);
            prev_n = d;
        }
        const double d1 = deficiency_lower_bound(a, 1);
        ASSERT_GE(d1, prev_a);
        prev_a = d1;
    }
}

TEST(Ancillarity, LocationFamily) {
    const std::vector<double> thetas{-2.0, 0.0, 2.0};
    const auto r = rank_ancillarity_check(thetas, 3, 10000, SeedSpec{73, 0});
    EXPECT_EQ(r.patterns, 6u);
    EXPECT_EQ(r.dof, 10);
    EXPECT_GT(r.p_value, 0.001);
    for (const auto& row : r.counts) EXPECT_EQ(std::accumulate(row.begin(), row.end(), std::size_t{0}), 10000u);
}

TEST(Ancillarity, ScaleFamilyAndTrivialCase) {
    const std::vector<double> thetas{-1.0, 0.0, 1.5};
    EXPECT_GT(rank_ancillarity_check(thetas, 3, 5000, SeedSpec{73, 1}, Family::Scale).p_value, 0.001);
    const auto single = rank_ancillarity_check(thetas, 1, 1000, SeedSpec{73, 2});
    EXPECT_EQ(single.patterns, 1u);
    EXPECT_EQ(single.p_value, 1.0);
    EXPECT_THROW(rank_ancillarity_check(thetas, 7, 1000, SeedSpec{73, 3}), ParameterError);
    EXPECT_THROW(rank_ancillarity_check(thetas, 3, 999, SeedSpec{73, 3}), ParameterError);
}

TEST(RankMinimax, BoundsAndMonteCarlo) {
    const auto r = rank_minimax_location(2.0, 25, 20000, SeedSpec{74, 0});
    EXPECT_EQ(r.rank_only_lower_bound, 4.0);
    EXPECT_EQ(r.full_data_risk, 0.04);
    EXPECT_NEAR(r.mean_risk_estimate, 0.04, 3.0 * r.mean_risk_se);
    EXPECT_EQ(r.constant_worst_risk, 4.0);
    EXPECT_NEAR(r.rank_estimator_variance, (625.0 - 1.0) / (12.0 * 625.0), 1e-15);
    EXPECT_NEAR(r.rank_estimator_worst_risk, r.rank_estimator_variance + 4.0, 3.0 * r.rank_estimator_worst_se);
    EXPECT_GE(r.rank_estimator_worst_risk, 4.0);
    EXPECT_LT(rank_minimax_location(1e-6, 5, 10, SeedSpec{74, 1}).rank_only_lower_bound, 1e-11);
    EXPECT_EQ(rank_minimax_location(2.0, 4, 10, SeedSpec{74, 2}, 0.5).constant_worst_risk, 6.25);
}

TEST(Witness, ExponentialFamily) {
    const auto w = exp_family_rank_witness();
    EXPECT_EQ(w.first, (std::vector<double>{1, 2, 3}));
    EXPECT_EQ(w.second, (std::vector<double>{1, 2, 30}));
    EXPECT_TRUE(w.ranks_equal);
    EXPECT_EQ(w.ranks_first, (RankVector{1, 2, 3}));
    EXPECT_EQ(w.sum_first, 6.0);
    EXPECT_EQ(w.sum_second, 33.0);
    // λ₂ⁿe^{−λ₂T}/λ₁ⁿe^{−λ₁T} = 8e^{−T}.
    EXPECT_NEAR(w.likelihood_ratio_first, 8.0 * std::exp(-6.0), 1e-15);
    EXPECT_NEAR(w.likelihood_ratio_second / (8.0 * std::exp(-33.0)), 1.0, 1e-12);
    EXPECT_TRUE(w.likelihood_ratios_differ);
}
