#pragma once

#include "cbench/dist.hpp"
#include "cbench/random.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <variant>
#include <vector>

namespace cbench::conformal {

using dist::LabeledPoint;
using dist::RealFn;

/// s(x,y) = |y − f̂(x)|.
struct AbsoluteResidual {
    RealFn predictor;
};
/// s(x,y) = max{q̂_lo(x) − y, y − q̂_hi(x)}; negative inside the band.
struct QuantileBand {
    RealFn lower;
    RealFn upper;
};
/// s(y) = y; the covariate is ignored.
struct Identity {};

/// Nonconformity score: large values are strange.
class ScoreRule {
public:
    using Kind = std::variant<AbsoluteResidual, QuantileBand, Identity>;

    explicit ScoreRule(Kind kind);
    static ScoreRule absolute_residual(RealFn predictor) { return ScoreRule(AbsoluteResidual{std::move(predictor)}); }
    static ScoreRule cqr(RealFn lower, RealFn upper) { return ScoreRule(QuantileBand{std::move(lower), std::move(upper)}); }
    static ScoreRule identity() { return ScoreRule(Identity{}); }

    /// Throws ValidationError for a CQR band with q̂_lo(x) > q̂_hi(x).
    [[nodiscard]] double operator()(double x, double y) const;
    [[nodiscard]] const Kind& kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

struct ClosedInterval {
    double lo;
    double hi;
    friend bool operator==(const ClosedInterval&, const ClosedInterval&) = default;
};

/// Finite union of disjoint, sorted closed intervals at nominal level 1−α.
class PredictionSet {
public:
    PredictionSet() = default;
    /// Sorts and merges overlapping intervals; throws ParameterError if lo > hi or NaN.
    PredictionSet(std::vector<ClosedInterval> intervals, double level);

    [[nodiscard]] const std::vector<ClosedInterval>& intervals() const noexcept { return intervals_; }
    [[nodiscard]] double level() const noexcept { return level_; }
    [[nodiscard]] bool empty() const noexcept { return intervals_.empty(); }
    [[nodiscard]] bool contains(double y) const noexcept;
    /// Total length (infinite for unbounded sets).
    [[nodiscard]] double length() const noexcept;

    friend bool operator==(const PredictionSet&, const PredictionSet&) = default;

private:
    std::vector<ClosedInterval> intervals_;
    double level_ = 0.0;
};

/// Deterministic "≥" counting (conservative) or randomized tie-breaking driven by an auxiliary
/// uniform drawn from `seed`.
struct TieRule {
    enum class Kind { DeterministicGeq, Randomized } kind = Kind::DeterministicGeq;
    SeedSpec seed{};

    static TieRule deterministic() { return {}; }
    static TieRule randomized(SeedSpec s) { return {Kind::Randomized, s}; }
};

struct CalibrationRecord {
    std::vector<double> scores;
    TieRule tie_rule;
    double alpha = 0.1;

    /// Throws ParameterError unless 0 < α < 1 and all scores are finite.
    void validate() const;
};

/// (#{i : S_i ≥ s} + 1)/(n + 1) under the deterministic rule;
/// (#{S_i > s} + U·(#{S_i = s} + 1))/(n + 1) under the randomized rule.
double conformal_p_value(const CalibrationRecord& cal, double s_test);

/// Randomized p-value with an explicit auxiliary uniform u ∈ [0,1].
double randomized_p_value(std::span<const double> scores, double s_test, double u);

/// [f̂(x) − q̂, f̂(x) + q̂] with q̂ the conformal empirical (1−α) quantile of the residuals.
PredictionSet split_conformal_interval(const RealFn& predictor, std::span<const double> residuals, double alpha,
                                       double x);

/// Conformal p-value of every candidate label on the grid, evaluated on the augmented dataset
/// (data plus (x, y_candidate)).
std::vector<double> full_conformal_p_values(std::span<const LabeledPoint> data, const ScoreRule& score, double x,
                                            std::span<const double> grid);

/// {y ∈ grid : p(y) > α}; runs of accepted grid points become closed intervals extended half a
/// grid step on each side.
PredictionSet full_conformal_set(std::span<const LabeledPoint> data, const ScoreRule& score, double alpha, double x,
                                 std::span<const double> grid);

/// `size` equally spaced points spanning [min y − 4 sd, max y + 4 sd] of the labels.
std::vector<double> default_grid(std::span<const LabeledPoint> data, std::size_t size = 2001);

std::vector<double> cqr_scores(std::span<const LabeledPoint> data, const RealFn& lower, const RealFn& upper);

/// [q̂_lo(x) − q̂, q̂_hi(x) + q̂]; empty when a negative correction inverts the band.
PredictionSet cqr_interval(const RealFn& lower, const RealFn& upper, std::span<const double> cal_scores, double alpha,
                           double x);

enum class Method { Split, Full, Cqr };

struct CoverageEstimate {
    double coverage = 0.0;
    double standard_error = 0.0;
    std::size_t reps = 0;
};

struct CoverageOptions {
    /// Grid size for the full method.
    std::size_t grid_size = 2001;
};

/// Monte Carlo marginal coverage. Each replicate draws a fresh calibration set and test point on
/// its own stream seed.derive(rep); predictors are the model's oracle mean (split, full) or the
/// oracle conditional α/2 and 1−α/2 quantiles (CQR).
CoverageEstimate coverage_audit(const dist::ConditionalModel& model, const dist::UnivariateLaw& design, Method method,
                                double alpha, std::size_t n_cal, std::size_t reps, SeedSpec seed,
                                const CoverageOptions& options = {});

}  // namespace cbench::conformal
