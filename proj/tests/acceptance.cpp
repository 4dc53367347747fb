// Runs the benchmark at its default configuration and prints one PASS/FAIL line per
// acceptance criterion. Exit status is nonzero if any criterion fails.
#include "cbench/runner.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

using cbench::cli::RunConfig;
using cbench::diagnostics::ExperimentReport;
using cbench::diagnostics::Metric;

namespace {

const Metric* find(const ExperimentReport& r, const std::string& name) {
    for (const auto& m : r.metrics())
        if (m.name == name) return &m;
    return nullptr;
}

struct Check {
    bool pass = true;
    std::string detail;

    void require(const ExperimentReport& r, const std::string& name) {
        const Metric* m = find(r, name);
        if (m == nullptr || !m->assertion) {
            pass = false;
            detail += " " + name + "=missing";
            return;
        }
        const bool ok = m->assertion->pass;
        pass = pass && ok;
        detail += " " + name + "=" + cbench::diagnostics::format_real(m->estimate);
        if (m->se) detail += "±" + cbench::diagnostics::format_real(*m->se);
        if (!ok) detail += "(fail)";
    }
    void require(bool ok, const std::string& what) {
        pass = pass && ok;
        detail += " " + what + (ok ? "" : "(fail)");
    }
};

}  // namespace

int main() {
    std::map<std::string, ExperimentReport> reports;
    double coverage_seconds = 0.0;
    for (const auto& name : cbench::cli::subcommands()) {
        if (name == "all") continue;
        RunConfig cfg;
        cfg.subcommand = name;
        const auto t0 = std::chrono::steady_clock::now();
        auto rs = cbench::cli::run_experiments(cfg);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (name == "coverage") coverage_seconds = secs;
        for (auto& r : rs) reports.emplace(r.experiment_id(), std::move(r));
    }
    auto at = [&](const std::string& id) -> const ExperimentReport& { return reports.at(id); };

    std::vector<std::pair<std::string, std::function<Check()>>> criteria{
        {"marginal split-conformal coverage within 3 SE of the rank value, under 10 s",
         [&] {
             Check c;
             c.require(at("coverage"), "split_coverage");
             c.require(coverage_seconds < 10.0, "runtime=" + cbench::diagnostics::format_real(coverage_seconds) + "s");
             return c;
         }},
        {"next rank uniform over n+1 ranks (chi-square p > 0.001)",
         [&] {
             Check c;
             c.require(at("ranks"), "next_rank_p_value");
             return c;
         }},
        {"grid full-conformal p-values equal (n-k+1)/(n+1) per order cell",
         [&] {
             Check c;
             c.require(at("ranks"), "cell_p_value_mismatches");
             return c;
         }},
        {"population quantile gap across designs, homoskedastic control",
         [&] {
             Check c;
             c.require(at("extensionality"), "population_gap");
             c.require(at("extensionality"), "homoskedastic_gap");
             return c;
         }},
        {"calibration quantile lands on either side of the midpoint with positive probability",
         [&] {
             Check c;
             c.require(at("extensionality"), "below_design_1");
             c.require(at("extensionality"), "above_design_2");
             return c;
         }},
        {"CQR correction larger under Beta(5,1), per-design coverage",
         [&] {
             Check c;
             c.require(at("cqr-transport"), "fitted_correction_difference");
             c.require(at("cqr-transport"), "fitted_coverage_uniform");
             c.require(at("cqr-transport"), "fitted_coverage_beta51");
             return c;
         }},
        {"TV closed form vs quadrature, testing risks",
         [&] {
             Check c;
             c.require(at("deficiency"), "tv_max_abs_error");
             c.require(at("deficiency"), "full_data_risk");
             c.require(at("deficiency"), "rank_rule_risk");
             return c;
         }},
        {"rank-pattern law does not depend on theta",
         [&] {
             Check c;
             c.require(at("deficiency"), "rank_ancillarity_location_p_value");
             return c;
         }},
        {"rank-only minimax bound (M^2, 1/n) = (4, 0.04), sample-mean risk",
         [&] {
             Check c;
             c.require(at("deficiency"), "rank_only_lower_bound");
             c.require(at("deficiency"), "full_data_minimax_risk");
             c.require(at("deficiency"), "sample_mean_risk");
             return c;
         }},
        {"PPI slope mean, variance 0.02 within 5%, information 200 < 1e4",
         [&] {
             Check c;
             c.require(at("ppi"), "slope_mean");
             c.require(at("ppi"), "slope_variance");
             c.require(at("ppi"), "information_ppi");
             c.require(at("ppi"), "information_full");
             c.require(at("ppi"), "blackwell_inferior");
             return c;
         }},
        {"ridge slopes 0.8 vs 0.5, residual scale within 2%",
         [&] {
             Check c;
             c.require(at("ppi"), "ridge_slope_ex2_4");
             c.require(at("ppi"), "ridge_slope_ex2_1");
             c.require(at("ppi"), "residual_scale_ex2_1");
             c.require(at("ppi"), "residual_scale_ex2_4");
             return c;
         }},
        {"kernel metric: self distance, triangle inequality, bridge vs conjugate separation",
         [&] {
             Check c;
             c.require(at("kernel-distance"), "self_distance");
             c.require(at("kernel-distance"), "triangle_failures");
             c.require(at("kernel-distance"), "bridge_vs_conjugate");
             return c;
         }},
        {"conglomerability on 100 random triples per kernel variant",
         [&] {
             Check c;
             c.require(at("kernel-distance"), "conglomerability_failures");
             return c;
         }},
        {"Bel(A) + Pl(A^c) = 1 exactly on 100 frames",
         [&] {
             Check c;
             c.require(at("ranks"), "belief_plausibility_duality_failures");
             return c;
         }},
        {"bridge kernel bit-identical under 100 data permutations",
         [&] {
             Check c;
             c.require(at("ranks"), "bridge_permutation_failures");
             return c;
         }},
    };

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const Check c = criteria[i].second();
        if (!c.pass) ++failed;
        std::printf("[%s] criterion %zu: %s |%s\n", c.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    c.detail.c_str());
    }
    std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
