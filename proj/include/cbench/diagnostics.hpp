#pragma once

#include "cbench/errors.hpp"
#include "cbench/events.hpp"
#include "cbench/random.hpp"

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cbench::diagnostics {

inline constexpr const char* kArtifactVersion = "coherence-bench 0.1.0";

struct ChiSquareResult {
    double statistic = 0.0;
    double p_value = 1.0;
    int dof = 0;
};

/// Pearson goodness of fit against `expected` probabilities with k−1 degrees of freedom.
/// Throws ValidationError for fewer than two cells, probabilities not summing to one, or any
/// expected count below `min_expected`.
ChiSquareResult chi_square_gof(std::span<const std::size_t> observed, std::span<const double> expected,
                               double min_expected = 5.0);

/// Pearson test that the rows of a contingency table share one distribution,
/// (r−1)(c−1) degrees of freedom. Columns with zero total are dropped.
ChiSquareResult chi_square_homogeneity(const std::vector<std::vector<std::size_t>>& table,
                                       double min_expected = 5.0);

struct AssertionResult {
    bool pass = false;
    /// |estimate − target| in standard errors; empty for exact comparisons.
    std::optional<double> margin_se;
};

/// Pass iff |estimate − target| ≤ k·se. An empty `se` marks an exact metric, which passes only
/// on equality and reports margin "exact".
AssertionResult assert_within_se(double estimate, double target, std::optional<double> se, double k_sigmas);

/// Pass iff estimate − target ≥ k·se (one-sided separation); the margin is (estimate − target)/se.
AssertionResult assert_exceeds_by_se(double estimate, double target, double se, double k_sigmas);

/// Plain boolean check reported as an exact assertion.
AssertionResult assert_true(bool condition);

struct Metric {
    std::string name;
    double estimate = 0.0;
    /// Empty for exact (closed-form or deterministic) metrics.
    std::optional<double> se;
    std::optional<double> target;
    std::optional<AssertionResult> assertion;
};

/// Seeded, reproducible record of one diagnostic run.
class ExperimentReport {
public:
    ExperimentReport(std::string experiment_id, SeedSpec seed);

    void set_parameter(const std::string& key, const std::string& value);
    void set_parameter(const std::string& key, double value);
    Metric& add_metric(Metric metric);
    /// Records a metric without an assertion.
    Metric& record(const std::string& name, double estimate, std::optional<double> se = std::nullopt);

    [[nodiscard]] const std::string& experiment_id() const noexcept { return id_; }
    [[nodiscard]] const std::map<std::string, std::string>& parameters() const noexcept { return params_; }
    [[nodiscard]] const std::vector<Metric>& metrics() const noexcept { return metrics_; }
    [[nodiscard]] SeedSpec seed() const noexcept { return seed_; }
    [[nodiscard]] std::string version() const { return kArtifactVersion; }
    /// True iff every asserted metric passed.
    [[nodiscard]] bool all_passed() const noexcept;
    [[nodiscard]] std::size_t failures() const noexcept;

    /// Long-format CSV: experiment_id,metric,estimate,se,target,pass,margin_se,seed,version.
    [[nodiscard]] std::string to_csv(bool header = true) const;
    [[nodiscard]] std::string to_json() const;

private:
    std::string id_;
    SeedSpec seed_;
    std::map<std::string, std::string> params_;
    std::vector<Metric> metrics_;
};

inline constexpr const char* kCsvHeader = "experiment_id,metric,estimate,se,target,pass,margin_se,seed,version";

/// Floating value with 12 significant digits ("inf", "-inf", "nan" for non-finite values).
std::string format_real(double v);

/// Ordered cut points c_1 < … < c_{M−1}: A_1 = (−∞, c_1], A_m = (c_{m−1}, c_m], A_M = (c_{M−1}, ∞).
struct FinitePartition {
    std::vector<double> cuts;

    [[nodiscard]] std::size_t size() const noexcept { return cuts.size() + 1; }
    [[nodiscard]] EventSet cell(std::size_t m) const;
};

struct ConglomerabilityResult {
    double probability = 0.0;
    double min_conditional = 0.0;
    double max_conditional = 0.0;
    bool within = false;
};

template <class K>
concept HasCdf = requires(const K& k, double y) {
    { k.cdf(y) } -> std::convertible_to<double>;
};

/// Checks that P(B) lies in [min_m P(B|A_m), max_m P(B|A_m)] (tolerance 1e−9), with every
/// probability computed from the kernel's cdf. Throws ValidationError if a cell has mass below
/// 1e−9.
template <HasCdf K>
ConglomerabilityResult conglomerability_probe(const K& kernel, const EventSet& event, const FinitePartition& partition) {
    if (!std::is_sorted(partition.cuts.begin(), partition.cuts.end()) ||
        std::adjacent_find(partition.cuts.begin(), partition.cuts.end()) != partition.cuts.end())
        throw ValidationError("conglomerability_probe: partition cuts must be strictly increasing");
    auto cdf = [&kernel](double y) { return static_cast<double>(kernel.cdf(y)); };
    ConglomerabilityResult out;
    out.probability = event.probability(cdf);
    out.min_conditional = 1.0;
    out.max_conditional = 0.0;
    for (std::size_t m = 0; m < partition.size(); ++m) {
        const EventSet cell = partition.cell(m);
        const double mass = cell.probability(cdf);
        if (mass < 1e-9) throw ValidationError("conglomerability_probe: partition cell with (near) zero mass");
        const double conditional = std::clamp(event.intersect(cell).probability(cdf) / mass, 0.0, 1.0);
        out.min_conditional = std::min(out.min_conditional, conditional);
        out.max_conditional = std::max(out.max_conditional, conditional);
    }
    constexpr double tol = 1e-9;
    out.within = out.probability >= out.min_conditional - tol && out.probability <= out.max_conditional + tol;
    return out;
}

}  // namespace cbench::diagnostics
