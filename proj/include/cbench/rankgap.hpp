#pragma once

#include "cbench/events.hpp"
#include "cbench/random.hpp"
#include "cbench/rational.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace cbench::rankgap {

/// Order-statistic cells of a sample y_(1) ≤ … ≤ y_(n):
/// I_k = (y_(k), y_(k+1)], k = 0..n, with y_(0) = −∞ and y_(n+1) = +∞.
/// Tied values are kept, so a cell may be degenerate (zero width).
class OrderCells {
public:
    /// Throws DomainError for empty input and ParameterError for non-finite values.
    static OrderCells from_values(std::span<const double> values);

    [[nodiscard]] std::size_t n() const noexcept { return cuts_.size(); }
    [[nodiscard]] std::size_t cell_count() const noexcept { return cuts_.size() + 1; }
    [[nodiscard]] const std::vector<double>& cuts() const noexcept { return cuts_; }
    /// Left endpoint of cell k (−∞ for k = 0).
    [[nodiscard]] double lower(std::size_t k) const;
    /// Right endpoint of cell k (+∞ for k = n).
    [[nodiscard]] double upper(std::size_t k) const;
    [[nodiscard]] bool degenerate(std::size_t k) const { return lower(k) == upper(k); }
    /// Index k of the cell containing y, i.e. #{i : y_(i) < y}.
    [[nodiscard]] std::size_t cell_index(double y) const noexcept;

    /// Cells of the sample extended by one value; every old cut point is kept.
    [[nodiscard]] OrderCells insert(double y_new) const;

    friend bool operator==(const OrderCells&, const OrderCells&) = default;

private:
    std::vector<double> cuts_;
};

OrderCells order_cells(std::span<const double> values);
OrderCells insert_and_recurse(const OrderCells& cells, double y_new);

/// Probability assignment over the n+1 cells, held as exact fractions summing to one.
class RankGapMass {
public:
    /// Throws ParameterError for negative entries or a total different from 1.
    explicit RankGapMass(std::vector<Rational> masses);

    [[nodiscard]] std::size_t size() const noexcept { return masses_.size(); }
    [[nodiscard]] const Rational& operator[](std::size_t k) const { return masses_.at(k); }
    [[nodiscard]] const std::vector<Rational>& masses() const noexcept { return masses_; }
    [[nodiscard]] std::vector<double> probabilities() const;

    friend bool operator==(const RankGapMass&, const RankGapMass&) = default;

private:
    std::vector<Rational> masses_;
};

/// Hill's A_(n): each of the n+1 gaps receives 1/(n+1).
RankGapMass hill_mass(std::size_t n);

/// Law of the rank of Y_{n+1} among Y_1..Y_{n+1}: uniform on 1..n+1.
std::vector<double> next_rank_distribution(std::size_t n);

/// Simulated rank counts (index r−1 for rank r) of a fresh i.i.d. N(0,1) draw among n priors.
std::vector<std::size_t> simulate_next_ranks(std::size_t n, std::size_t reps, SeedSpec seed);

/// Law inside each gap: uniform on bounded cells, exponential tails with scale s beyond the
/// extreme order statistics.
struct WithinCellCompletion {
    double tail_scale = 1.0;

    /// Scale max(sample interquartile range, 1e−6); quartiles by linear interpolation
    /// between order statistics.
    static WithinCellCompletion from_data(std::span<const double> values);

    friend bool operator==(const WithinCellCompletion&, const WithinCellCompletion&) = default;
};

struct BridgedKernel {
    OrderCells cells;
    RankGapMass mass;
    WithinCellCompletion completion;
    /// cumulative[k] = mass of cells 0..k−1 (k = 0..n+1), rounded once from the exact sums.
    std::vector<double> cumulative;

    friend bool operator==(const BridgedKernel& a, const BridgedKernel& b) {
        return a.cells == b.cells && a.mass == b.mass && a.completion == b.completion;
    }
};

/// Normal-Normal conjugate predictive. A prior variance of +∞ selects the flat-prior limit.
struct ConjugateGaussianKernel {
    double prior_mean = 0.0;
    double prior_variance = 1.0;
    double noise_variance = 1.0;
    std::size_t count = 0;
    double sum = 0.0;
    double posterior_mean = 0.0;
    double posterior_variance = 1.0;

    [[nodiscard]] double predictive_mean() const noexcept { return posterior_mean; }
    [[nodiscard]] double predictive_variance() const noexcept { return noise_variance + posterior_variance; }

    friend bool operator==(const ConjugateGaussianKernel&, const ConjugateGaussianKernel&) = default;
};

struct McEstimate {
    double estimate = 0.0;
    double standard_error = 0.0;
};

/// One-step predictive distribution for the next observation given a history.
class PredictiveKernel {
public:
    using Variant = std::variant<BridgedKernel, ConjugateGaussianKernel>;

    explicit PredictiveKernel(Variant v) : v_(std::move(v)) {}

    [[nodiscard]] const Variant& variant() const noexcept { return v_; }
    [[nodiscard]] bool is_bridged() const noexcept { return std::holds_alternative<BridgedKernel>(v_); }

    [[nodiscard]] double cdf(double y) const;
    /// Smallest y with cdf(y) ≥ p, p ∈ (0,1).
    [[nodiscard]] double quantile(double p) const;
    [[nodiscard]] double draw(Rng& rng) const;
    [[nodiscard]] std::vector<double> sample(std::size_t n, SeedSpec seed) const;
    /// Monte Carlo estimate of E[f(Y)] with its standard error; mc_size ≥ 2.
    [[nodiscard]] McEstimate expect(const std::function<double(double)>& f, std::size_t mc_size, SeedSpec seed) const;
    /// E[f(Y)] by deterministic quadrature (cell by cell for bridged kernels); f must be bounded.
    [[nodiscard]] double integrate(const std::function<double(double)>& f) const;
    /// Plain-text record: one key=value per line.
    [[nodiscard]] std::string describe() const;

    friend bool operator==(const PredictiveKernel&, const PredictiveKernel&) = default;

private:
    Variant v_;
};

/// Throws ParameterError if the mass does not match the cell count or the tail scale is not positive.
PredictiveKernel bridge_kernel(const OrderCells& cells, const RankGapMass& mass, const WithinCellCompletion& completion);

/// A_(n) bridge of a sample: order cells, Hill mass, data-driven tail scale.
PredictiveKernel hill_bridge(std::span<const double> values);

struct ConjugatePrior {
    double mean = 0.0;
    double variance = 1.0;
};

/// μ_n = (μ₀/τ₀² + Σy/σ²)/(1/τ₀² + n/σ²), τ_n² = 1/(1/τ₀² + n/σ²); predictive N(μ_n, σ² + τ_n²).
PredictiveKernel bayes_predictive(const ConjugatePrior& prior, double noise_variance, std::span<const double> data);

using KernelBuilder = std::function<PredictiveKernel(std::span<const double>)>;

/// φ(y) = tanh(a·y + b)/max(1, a): sup-norm ≤ 1 and Lipschitz constant ≤ 1.
struct TestFunction {
    double a;
    double b;
    [[nodiscard]] double operator()(double y) const;
};

struct KernelMetricConfig {
    /// φ_1..φ_J; weight of φ_j is 2^{−j}.
    std::vector<TestFunction> functions = default_test_functions();
    /// Histories drawn from λ_n = N(0,1)^⊗n per estimate; shared by every φ_j.
    std::size_t mc_size = 4000;

    /// a ∈ {0.5, 1, 2, 4} (outer) × b ∈ {−2, −0.5, 0.5, 2} (inner), J = 16.
    static std::vector<TestFunction> default_test_functions();
};

/// f_{n,j}(h) = ∫ φ_j dκ_n(·|h) for several kernel families evaluated on one common set of
/// histories, so pairwise distances share Monte Carlo noise.
class KernelFeatureSample {
public:
    KernelFeatureSample(std::span<const KernelBuilder> builders, std::size_t n, const KernelMetricConfig& cfg,
                        SeedSpec seed);

    [[nodiscard]] std::size_t families() const noexcept { return features_.size(); }
    /// d_n between families a and b with a delta-method standard error.
    [[nodiscard]] McEstimate distance(std::size_t a, std::size_t b) const;

private:
    std::size_t mc_size_;
    std::size_t functions_;
    // features_[family][history * functions_ + j]
    std::vector<std::vector<double>> features_;
};

/// d_n(κ, κ′) = Σ_j 2^{−j} min(‖f_{n,j} − f′_{n,j}‖_{L²(λ_n)}, 1), estimated by Monte Carlo.
McEstimate kernel_distance(const KernelBuilder& k1, const KernelBuilder& k2, std::size_t n,
                           const KernelMetricConfig& cfg, SeedSpec seed);

struct BeliefPlausibility {
    Rational belief;
    Rational plausibility;
};

/// Bel(A) = mass of cells contained in A, Pl(A) = mass of cells meeting A.
BeliefPlausibility belief_plausibility(const RankGapMass& mass, const OrderCells& cells, const EventSet& event);

/// True iff the builder returns an identical kernel for the data and its permutation.
/// Throws ParameterError if `permutation` is not a bijection of 0..n−1.
bool rank_invariance_check(const KernelBuilder& builder, std::span<const double> data,
                           std::span<const std::size_t> permutation);

}  // namespace cbench::rankgap
