#include "cbench/diagnostics.hpp"
#include "cbench/errors.hpp"
#include "cbench/rankgap.hpp"

#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include <cmath>

using namespace cbench;
using namespace cbench::diagnostics;

TEST(ChiSquare, GoodnessOfFit) {
    const std::vector<std::size_t> proportional{25, 50, 25};
    const std::vector<double> probs{0.25, 0.5, 0.25};
    const auto exact = chi_square_gof(proportional, probs);
    EXPECT_EQ(exact.statistic, 0.0);
    EXPECT_EQ(exact.p_value, 1.0);
    EXPECT_EQ(exact.dof, 2);

    const auto coin = chi_square_gof(std::vector<std::size_t>{55, 45}, std::vector<double>{0.5, 0.5});
    EXPECT_DOUBLE_EQ(coin.statistic, 1.0);
    EXPECT_NEAR(coin.p_value, std::erfc(std::sqrt(0.5)), 1e-12);  // P(χ²₁ > 1) = P(|Z| > 1)

    EXPECT_THROW(chi_square_gof(std::vector<std::size_t>{10}, std::vector<double>{1.0}), ValidationError);
    EXPECT_THROW(chi_square_gof(std::vector<std::size_t>{2, 2}, std::vector<double>{0.5, 0.5}), ValidationError);
    EXPECT_THROW(chi_square_gof(std::vector<std::size_t>{20, 20}, std::vector<double>{0.5, 0.4}), ValidationError);
}

TEST(ChiSquare, Homogeneity) {
    const std::vector<std::vector<std::size_t>> same{{10, 20, 30}, {20, 40, 60}};
    const auto r = chi_square_homogeneity(same);
    EXPECT_NEAR(r.statistic, 0.0, 1e-12);
    EXPECT_EQ(r.dof, 2);
    // 2×2 table with hand-computed statistic: expected 15 in every cell, (5²/15)·4.
    const std::vector<std::vector<std::size_t>> skew{{20, 10}, {10, 20}};
    EXPECT_NEAR(chi_square_homogeneity(skew).statistic, 100.0 / 15.0, 1e-12);
}

TEST(Assertions, WithinSe) {
    const auto pass = assert_within_se(0.9, 0.9, 0.01, 3.0);
    EXPECT_TRUE(pass.pass);
    EXPECT_EQ(*pass.margin_se, 0.0);
    const auto fail = assert_within_se(0.95, 0.9, 0.01, 3.0);
    EXPECT_FALSE(fail.pass);
    EXPECT_NEAR(*fail.margin_se, 5.0, 1e-9);
    const auto exact = assert_within_se(2.0, 2.0, std::nullopt, 3.0);
    EXPECT_TRUE(exact.pass);
    EXPECT_FALSE(exact.margin_se.has_value());
    EXPECT_FALSE(assert_within_se(2.0, 2.5, std::nullopt, 3.0).pass);
}

TEST(Assertions, ExceedsBySe) {
    EXPECT_TRUE(assert_exceeds_by_se(0.06, 0.0, 0.01, 5.0).pass);
    EXPECT_FALSE(assert_exceeds_by_se(0.04, 0.0, 0.01, 5.0).pass);
    EXPECT_NEAR(*assert_exceeds_by_se(0.04, 0.0, 0.01, 5.0).margin_se, 4.0, 1e-12);
    EXPECT_TRUE(assert_true(true).pass);
    EXPECT_FALSE(assert_true(false).pass);
}

TEST(Report, CsvSchema) {
    ExperimentReport empty("demo", SeedSpec{42, 3});
    EXPECT_EQ(empty.to_csv(), std::string(kCsvHeader) + "\n");
    EXPECT_TRUE(empty.all_passed());

    ExperimentReport r("demo", SeedSpec{42, 3});
    r.add_metric({"gap", 1.0 / 3.0, std::nullopt, 1.0 / 3.0, assert_within_se(1.0 / 3.0, 1.0 / 3.0, std::nullopt, 3)});
    EXPECT_EQ(r.to_csv(), std::string(kCsvHeader) +
                              "\ndemo,gap,0.333333333333,exact,0.333333333333,true,exact,42,coherence-bench 0.1.0\n");
    r.record("info", 2.5, 0.125);
    r.add_metric({"bad", 1.0, 0.1, 0.0, assert_within_se(1.0, 0.0, 0.1, 3.0)});
    const auto csv = r.to_csv(false);
    EXPECT_EQ(csv.find("experiment_id"), std::string::npos);
    EXPECT_NE(csv.find("demo,info,2.5,0.125,,,,42,"), std::string::npos);
    EXPECT_NE(csv.find("demo,bad,1,0.1,0,false,10,42,"), std::string::npos);
    EXPECT_EQ(csv.find('\r'), std::string::npos);
    EXPECT_FALSE(r.all_passed());
    EXPECT_EQ(r.failures(), 1u);
}

TEST(Report, JsonAndDeterminism) {
    auto make = [] {
        ExperimentReport r("demo", SeedSpec{7, 1});
        r.set_parameter("alpha", 0.1);
        r.set_parameter("design", "Unif[0,1]");
        r.record("q", std::sqrt(2.0), 0.01);
        return r;
    };
    EXPECT_EQ(make().to_csv(), make().to_csv());
    EXPECT_EQ(make().to_json(), make().to_json());
    const auto doc = nlohmann::json::parse(make().to_json());
    EXPECT_EQ(doc["experiment_id"], "demo");
    EXPECT_EQ(doc["seed"]["master_seed"], 7);
    EXPECT_EQ(doc["parameters"]["alpha"], "0.1");
    EXPECT_EQ(doc["metrics"][0]["metric"], "q");
    EXPECT_TRUE(doc["metrics"][0]["pass"].is_null());
    EXPECT_EQ(doc["all_passed"], true);
}

TEST(FormatReal, TwelveSignificantDigits) {
    EXPECT_EQ(format_real(0.1), "0.1");
    EXPECT_EQ(format_real(2.0 / 3.0), "0.666666666667");
    EXPECT_EQ(format_real(1e-20), "1e-20");
    EXPECT_EQ(format_real(INFINITY), "inf");
    EXPECT_EQ(format_real(-INFINITY), "-inf");
}

TEST(Partition, Cells) {
    const FinitePartition p{{-1.0, 1.0}};
    ASSERT_EQ(p.size(), 3u);
    EXPECT_TRUE(p.cell(0).contains(-1.0));
    EXPECT_TRUE(p.cell(1).contains(1.0));
    EXPECT_FALSE(p.cell(1).contains(-1.0));
    EXPECT_TRUE(p.cell(2).contains(1e9));
    EXPECT_THROW((void)p.cell(3), DomainError);
}

TEST(Conglomerability, Examples) {
    const auto g = rankgap::bayes_predictive({0.0, 1.0}, 1.0, std::vector<double>{0.3, -0.2});
    const auto whole = conglomerability_probe(g, EventSet::whole_line(), FinitePartition{{-1.0, 0.0, 2.0}});
    EXPECT_EQ(whole.probability, 1.0);
    EXPECT_EQ(whole.min_conditional, 1.0);
    EXPECT_EQ(whole.max_conditional, 1.0);
    EXPECT_TRUE(whole.within);

    EXPECT_TRUE(conglomerability_probe(g, EventSet::at_most(0.0), FinitePartition{{-1.0, 1.0}}).within);
    EXPECT_THROW(conglomerability_probe(g, EventSet::at_most(0.0), FinitePartition{{100.0, 101.0}}), ValidationError);
    EXPECT_THROW(conglomerability_probe(g, EventSet::at_most(0.0), FinitePartition{{1.0, -1.0}}), ValidationError);
}

TEST(Conglomerability, BridgedKernelsAlwaysWithin) {
    Rng rng(SeedSpec{51, 0});
    for (int t = 0; t < 100; ++t) {
        std::vector<double> data(2 + rng() % 7);
        for (double& y : data) y = rng.normal();
        const auto k = rankgap::hill_bridge(data);
        std::vector<HalfOpenInterval> pieces;
        for (int p = 0; p < 2; ++p) {
            const double a = k.quantile(rng.uniform()), b = k.quantile(rng.uniform());
            pieces.push_back({std::min(a, b), std::max(a, b)});
        }
        FinitePartition part;
        for (double u : {0.2, 0.45, 0.8}) part.cuts.push_back(k.quantile(u + 0.1 * (rng.uniform() - 0.5)));
        ASSERT_TRUE(conglomerability_probe(k, EventSet(pieces), part).within);
    }
}
