#include "cbench/dist.hpp"
#include "cbench/errors.hpp"
#include "cbench/special.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace cbench;
using namespace cbench::dist;

namespace {
const RealFn one_plus_x = [](double x) { return 1.0 + x; };

std::vector<UnivariateLaw> law_zoo() {
    return {UnivariateLaw::uniform(0.0, 1.0), UnivariateLaw::uniform(2.0, 4.0), UnivariateLaw::beta(2.0, 5.0),
            UnivariateLaw::beta(5.0, 1.0),    UnivariateLaw::beta(0.5, 0.5), UnivariateLaw::normal(1.0, 4.0),
            UnivariateLaw::standard_normal(), UnivariateLaw::exponential(1.0), UnivariateLaw::exponential(3.0)};
}
}  // namespace

TEST(Special, NormalCdfAgainstErfcOracle) {
    for (double x = -30.0; x <= 8.0; x += 0.37) {
        const double expect = oracle::phi(x);
        EXPECT_NEAR(normal_cdf(x), expect, 1e-12 * std::max(1.0, expect)) << x;
        if (x < -1.0) EXPECT_NEAR(normal_cdf(x) / expect, 1.0, 1e-12) << x;
    }
}

TEST(Special, NormalQuantileRoundTrip) {
    for (double p : {1e-300, 1e-12, 1e-6, 0.001, 0.025, 0.3, 0.5, 0.77, 0.975, 0.999, 1.0 - 1e-9}) {
        const double x = normal_quantile(p);
        const double back = p > 0.5 ? 1.0 - normal_cdf(-x) : normal_cdf(x);
        EXPECT_NEAR(back / p, 1.0, 1e-12) << p;
    }
    EXPECT_EQ(normal_quantile(0.5), 0.0);
    EXPECT_TRUE(std::isinf(normal_quantile(0.0)));
    EXPECT_TRUE(std::isinf(normal_quantile(1.0)));
    EXPECT_THROW(normal_quantile(1.5), DomainError);
}

TEST(Special, ChiSquareTail) {
    // χ²₂ tail is exp(−x/2).
    EXPECT_NEAR(chi_square_upper_tail(3.0, 2.0), std::exp(-1.5), 1e-14);
    EXPECT_EQ(chi_square_upper_tail(0.0, 4.0), 1.0);
    EXPECT_THROW(chi_square_upper_tail(1.0, 0.0), DomainError);
}

TEST(Sample, PointMassIsConstant) {
    EXPECT_EQ(sample(UnivariateLaw::point_mass(2.0), 3, SeedSpec{5, 0}), (std::vector<double>{2.0, 2.0, 2.0}));
}

TEST(Sample, UniformMean) {
    const auto v = sample(UnivariateLaw::uniform(0.0, 1.0), 100000, SeedSpec{1, 0});
    EXPECT_NEAR(std::accumulate(v.begin(), v.end(), 0.0) / v.size(), 0.5, 0.01);
}

TEST(Sample, NormalEcdfAtZero) {
    const auto v = sample(UnivariateLaw::standard_normal(), 100000, SeedSpec{2, 0});
    const double frac = static_cast<double>(std::count_if(v.begin(), v.end(), [](double y) { return y <= 0.0; })) /
                        static_cast<double>(v.size());
    EXPECT_NEAR(frac, 0.5, 0.005);
}

TEST(Sample, Deterministic) {
    for (const auto& law : law_zoo()) {
        EXPECT_EQ(sample(law, 50, SeedSpec{3, 4}), sample(law, 50, SeedSpec{3, 4})) << law.describe();
    }
}

TEST(Sample, BetaDrawsMatchCdf) {
    // Kolmogorov-Smirnov distance for 20000 Beta(2,5) draws against the quadrature cdf.
    auto v = sample(UnivariateLaw::beta(2.0, 5.0), 20000, SeedSpec{6, 0});
    std::sort(v.begin(), v.end());
    double d = 0.0;
    for (std::size_t i = 0; i < v.size(); i += 50) {
        const double f = oracle::beta25_cdf(v[i]);
        d = std::max({d, std::abs(f - static_cast<double>(i) / v.size()), std::abs(f - (i + 1.0) / v.size())});
    }
    EXPECT_LT(d, 1.63 / std::sqrt(static_cast<double>(v.size())));  // 1% KS critical value
}

TEST(Law, ParameterValidation) {
    EXPECT_THROW(UnivariateLaw::uniform(1.0, 1.0), ParameterError);
    EXPECT_THROW(UnivariateLaw::beta(0.0, 1.0), ParameterError);
    EXPECT_THROW(UnivariateLaw::normal(0.0, -1.0), ParameterError);
    EXPECT_THROW(UnivariateLaw::exponential(0.0), ParameterError);
    EXPECT_THROW(UnivariateLaw::point_mass(std::nan("")), ParameterError);
}

TEST(Law, CdfExamples) {
    EXPECT_EQ(UnivariateLaw::standard_normal().cdf(0.0), 0.5);
    EXPECT_DOUBLE_EQ(UnivariateLaw::uniform(0.0, 1.0).cdf(0.3), 0.3);
    const double oracle_value = oracle::beta25_cdf(0.5);
    EXPECT_NEAR(oracle_value, 0.890625, 1e-13);
    EXPECT_NEAR(UnivariateLaw::beta(2.0, 5.0).cdf(0.5), oracle_value, 1e-10);
}

TEST(Law, QuantileExamples) {
    EXPECT_NEAR(UnivariateLaw::standard_normal().quantile(0.5), 0.0, 1e-15);
    EXPECT_DOUBLE_EQ(UnivariateLaw::uniform(2.0, 4.0).quantile(0.25), 2.5);
    const auto ex = UnivariateLaw::exponential(1.0);
    const double bisected = oracle::bisect([](double x) { return 1.0 - std::exp(-x); }, 0.9, 0.0, 50.0);
    EXPECT_NEAR(bisected, std::log(10.0), 1e-12);
    EXPECT_NEAR(ex.quantile(0.9), bisected, 1e-12);
    EXPECT_THROW((void)ex.quantile(0.0), DomainError);
    EXPECT_THROW((void)ex.quantile(1.0), DomainError);
}

TEST(Law, CdfQuantileRoundTrip) {
    for (const auto& law : law_zoo()) {
        for (int i = 1; i <= 99; ++i) {
            const double p = i / 100.0;
            EXPECT_NEAR(law.cdf(law.quantile(p)), p, 1e-8) << law.describe() << " p=" << p;
        }
    }
}

TEST(Law, CdfIsMonotoneWithLimits) {
    for (const auto& law : law_zoo()) {
        double prev = 0.0;
        for (double x = -50.0; x <= 50.0; x += 0.05) {
            const double f = law.cdf(x);
            ASSERT_GE(f, prev) << law.describe();
            ASSERT_LE(f, 1.0);
            prev = f;
        }
        EXPECT_EQ(law.cdf(-std::numeric_limits<double>::infinity()), 0.0);
        EXPECT_EQ(law.cdf(std::numeric_limits<double>::infinity()), 1.0);
    }
}

TEST(Law, ExpectMatchesMeans) {
    for (const auto& law : law_zoo()) {
        EXPECT_NEAR(law.expect([](double x) { return x; }), law.mean(), 1e-8) << law.describe();
    }
    EXPECT_EQ(UnivariateLaw::point_mass(3.0).expect([](double x) { return x * x; }), 9.0);
    EXPECT_THROW((void)UnivariateLaw::point_mass(3.0).pdf(3.0), DomainError);
}

TEST(ConditionalModel, ScaleMustBePositive) {
    const ConditionalModel bad([](double) { return 0.0; }, [](double x) { return x - 0.5; });
    EXPECT_THROW((void)bad.scale(0.2), ParameterError);
    const std::vector<double> xs{0.6, 0.7, 0.1};
    EXPECT_THROW(bad.validate_scale(xs), ParameterError);
}

TEST(ConditionalModel, GaussianConditionalCdf) {
    const ConditionalModel m([](double x) { return 2.0 * x; }, one_plus_x);
    EXPECT_NEAR(m.cdf_y(0.5, 1.0 + 1.5), oracle::phi(1.0), 1e-14);
    EXPECT_NEAR(m.quantile_y(0.5, oracle::phi(1.0)), 2.5, 1e-9);
    // Monte Carlo at a fixed x.
    Rng rng(SeedSpec{8, 0});
    int below = 0;
    const int n = 40000;
    for (int i = 0; i < n; ++i) below += m.draw_y(0.5, rng) <= 2.5;
    const double p = oracle::phi(1.0);
    EXPECT_NEAR(static_cast<double>(below) / n, p, 4.0 * std::sqrt(p * (1 - p) / n));
}

TEST(Mixture, PointMassDesignIsFoldedNormal) {
    for (double r : {0.1, 1.0, 2.5}) {
        EXPECT_NEAR(mixture_residual_cdf(UnivariateLaw::point_mass(0.0), one_plus_x, r), 2.0 * oracle::phi(r) - 1.0,
                    1e-14);
    }
    EXPECT_EQ(mixture_residual_cdf(UnivariateLaw::uniform(0.0, 1.0), one_plus_x, 0.0), 0.0);
    EXPECT_EQ(mixture_residual_cdf(UnivariateLaw::uniform(0.0, 1.0), one_plus_x, -1.0), 0.0);
}

TEST(Mixture, UniformDesignAgainstQuadratureOracle) {
    const double expect = oracle::mixture_cdf([](double) { return 1.0; }, one_plus_x, 2.0);
    EXPECT_NEAR(expect, 0.818496994478211, 1e-12);
    EXPECT_NEAR(mixture_residual_cdf(UnivariateLaw::uniform(0.0, 1.0), one_plus_x, 2.0), expect, 1e-8);
}

TEST(Mixture, UniformDesignMonteCarlo) {
    const auto design = UnivariateLaw::uniform(0.0, 1.0);
    Rng rng(SeedSpec{13, 0});
    const int n = 1000000;
    int hits = 0;
    for (int i = 0; i < n; ++i) {
        const double x = design.draw(rng);
        hits += (1.0 + x) * std::abs(rng.normal()) <= 2.0;
    }
    const double p = mixture_residual_cdf(design, one_plus_x, 2.0);
    EXPECT_NEAR(static_cast<double>(hits) / n, p, 3.0 * std::sqrt(p * (1 - p) / n));
}

TEST(Mixture, Quantiles) {
    const double folded = mixture_residual_quantile(UnivariateLaw::point_mass(0.0), [](double) { return 1.0; }, 0.9);
    EXPECT_NEAR(folded, 1.64485362695147, 1e-7);
    EXPECT_NEAR(folded, normal_quantile(0.95), 1e-7);

    const auto unif_cdf = [](double r) { return oracle::mixture_cdf([](double) { return 1.0; }, one_plus_x, r); };
    const auto beta_cdf = [](double r) {
        return oracle::mixture_cdf([](double x) { return 30.0 * x * std::pow(1.0 - x, 4); }, one_plus_x, r);
    };
    const double r1_oracle = oracle::bisect(unif_cdf, 0.9, 0.0, 20.0);
    const double r2_oracle = oracle::bisect(beta_cdf, 0.9, 0.0, 20.0);
    EXPECT_NEAR(r1_oracle, 2.50634906592143, 1e-9);
    EXPECT_NEAR(r2_oracle, 2.12538024870086, 1e-9);
    const double r1 = mixture_residual_quantile(UnivariateLaw::uniform(0.0, 1.0), one_plus_x, 0.9);
    const double r2 = mixture_residual_quantile(UnivariateLaw::beta(2.0, 5.0), one_plus_x, 0.9);
    EXPECT_NEAR(r1, r1_oracle, 1e-7);
    EXPECT_NEAR(r2, r2_oracle, 1e-7);
    EXPECT_GT(r1, folded);
    EXPECT_LT(r2, r1);
    EXPECT_NEAR(mixture_residual_cdf(UnivariateLaw::uniform(0.0, 1.0), one_plus_x, r1), 0.9, 1e-7);
}

TEST(Mixture, CdfMonotoneInUnitInterval) {
    const auto design = UnivariateLaw::beta(2.0, 5.0);
    double prev = 0.0;
    for (double r = 0.0; r <= 10.0; r += 0.1) {
        const double f = mixture_residual_cdf(design, one_plus_x, r);
        ASSERT_GE(f, prev - 1e-12);
        ASSERT_LE(f, 1.0 + 1e-12);
        prev = f;
    }
}

TEST(EmpiricalQuantile, ConformalRule) {
    EXPECT_EQ(empirical_quantile(std::vector<double>{4, 1, 3, 2}, 0.5), 3.0);
    EXPECT_EQ(empirical_quantile(std::vector<double>{5}, 0.01), 5.0);
    EXPECT_EQ(empirical_quantile(std::vector<double>{5}, 0.99), 5.0);
    std::vector<double> v(99);
    std::iota(v.begin(), v.end(), 1.0);
    EXPECT_EQ(empirical_quantile(v, 0.9), 90.0);
    EXPECT_EQ(order_statistic_index(99, 0.9, QuantileRule::Conformal), 90u);
    EXPECT_EQ(order_statistic_index(10, 0.95, QuantileRule::Conformal), 10u);
    EXPECT_EQ(empirical_quantile(v, 0.9, QuantileRule::InverseEcdf), 90.0);
    EXPECT_THROW(empirical_quantile(std::vector<double>{}, 0.5), DomainError);
}

TEST(TotalVariation, ClosedFormAgainstQuadrature) {
    for (double a : {0.1, 0.5, 1.0, 2.0}) {
        for (int n : {1, 4, 16}) {
            EXPECT_NEAR(tv_gaussian_shift(a, n), oracle::tv_shift(a, n), 1e-6) << a << " " << n;
        }
    }
    EXPECT_NEAR(tv_gaussian_shift(1.0, 1), 0.682689492137086, 1e-12);
    EXPECT_NEAR(tv_gaussian_shift(0.5, 4), tv_gaussian_shift(1.0, 1), 1e-15);
    EXPECT_LT(tv_gaussian_shift(1e-12, 1), 1e-11);
}
