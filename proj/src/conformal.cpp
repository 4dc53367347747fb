#include "cbench/conformal.hpp"

#include "cbench/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace cbench::conformal {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("alpha must lie in (0,1)");
}

std::vector<double> sorted_scores(std::span<const LabeledPoint> data, const ScoreRule& score) {
    std::vector<double> out;
    out.reserve(data.size());
    for (const auto& pt : data) out.push_back(score(pt.x, pt.y));
    std::sort(out.begin(), out.end());
    return out;
}

// #{S_i ≥ s} on ascending scores.
std::size_t count_at_least(const std::vector<double>& sorted, double s) {
    return static_cast<std::size_t>(sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), s));
}

}  // namespace

ScoreRule::ScoreRule(Kind kind) : kind_(std::move(kind)) {
    std::visit(Overloaded{
                   [](const AbsoluteResidual& a) {
                       if (!a.predictor) throw ParameterError("AbsoluteResidual score needs a predictor");
                   },
                   [](const QuantileBand& q) {
                       if (!q.lower || !q.upper) throw ParameterError("CQR score needs both quantile predictors");
                   },
                   [](const Identity&) {},
               },
               kind_);
}

double ScoreRule::operator()(double x, double y) const {
    return std::visit(Overloaded{
                          [&](const AbsoluteResidual& a) { return std::abs(y - a.predictor(x)); },
                          [&](const QuantileBand& q) {
                              const double lo = q.lower(x);
                              const double hi = q.upper(x);
                              if (lo > hi) throw ValidationError("CQR score: quantile predictors cross at x");
                              return std::max(lo - y, y - hi);
                          },
                          [&](const Identity&) { return y; },
                      },
                      kind_);
}

PredictionSet::PredictionSet(std::vector<ClosedInterval> intervals, double level) : level_(level) {
    for (const auto& iv : intervals) {
        if (std::isnan(iv.lo) || std::isnan(iv.hi) || iv.lo > iv.hi)
            throw ParameterError("PredictionSet: interval requires lo <= hi");
    }
    std::sort(intervals.begin(), intervals.end(), [](const auto& a, const auto& b) { return a.lo < b.lo; });
    for (const auto& iv : intervals) {
        if (!intervals_.empty() && iv.lo <= intervals_.back().hi) {
            intervals_.back().hi = std::max(intervals_.back().hi, iv.hi);
        } else {
            intervals_.push_back(iv);
        }
    }
}

bool PredictionSet::contains(double y) const noexcept {
    auto it = std::upper_bound(intervals_.begin(), intervals_.end(), y,
                               [](double v, const ClosedInterval& iv) { return v < iv.lo; });
    if (it == intervals_.begin()) return false;
    --it;
    return y <= it->hi;
}

double PredictionSet::length() const noexcept {
    double total = 0.0;
    for (const auto& iv : intervals_) total += iv.hi - iv.lo;
    return total;
}

void CalibrationRecord::validate() const {
    check_alpha(alpha);
    for (double s : scores) {
        if (!std::isfinite(s)) throw ParameterError("CalibrationRecord: scores must be finite");
    }
}

double conformal_p_value(const CalibrationRecord& cal, double s_test) {
    if (cal.scores.empty()) throw DomainError("conformal_p_value: empty calibration set");
    cal.validate();
    if (cal.tie_rule.kind == TieRule::Kind::Randomized) {
        Rng rng(cal.tie_rule.seed);
        return randomized_p_value(cal.scores, s_test, rng.uniform());
    }
    const auto at_least = std::count_if(cal.scores.begin(), cal.scores.end(), [&](double s) { return s >= s_test; });
    return static_cast<double>(at_least + 1) / static_cast<double>(cal.scores.size() + 1);
}

double randomized_p_value(std::span<const double> scores, double s_test, double u) {
    if (scores.empty()) throw DomainError("randomized_p_value: empty calibration set");
    if (!(u >= 0.0 && u <= 1.0)) throw DomainError("randomized_p_value: u must lie in [0,1]");
    std::size_t above = 0;
    std::size_t tied = 0;
    for (double s : scores) {
        if (s > s_test) {
            ++above;
        } else if (s == s_test) {
            ++tied;
        }
    }
    return (static_cast<double>(above) + u * static_cast<double>(tied + 1)) / static_cast<double>(scores.size() + 1);
}

PredictionSet split_conformal_interval(const RealFn& predictor, std::span<const double> residuals, double alpha,
                                       double x) {
    check_alpha(alpha);
    for (double r : residuals) {
        if (!(r >= 0.0)) throw ParameterError("split_conformal_interval: residuals must be nonnegative");
    }
    const double q = dist::empirical_quantile(residuals, 1.0 - alpha, dist::QuantileRule::Conformal);
    const double centre = predictor(x);
    return PredictionSet({{centre - q, centre + q}}, 1.0 - alpha);
}

std::vector<double> full_conformal_p_values(std::span<const LabeledPoint> data, const ScoreRule& score, double x,
                                            std::span<const double> grid) {
    if (grid.empty()) throw DomainError("full_conformal: empty candidate grid");
    if (!std::is_sorted(grid.begin(), grid.end())) throw ParameterError("full_conformal: grid must be sorted");
    // Injected predictors do not depend on the candidate, so the data scores of every augmented
    // dataset coincide and are computed once.
    const auto sorted = sorted_scores(data, score);
    const double denom = static_cast<double>(data.size() + 1);
    std::vector<double> p(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double s = score(x, grid[i]);
        p[i] = static_cast<double>(count_at_least(sorted, s) + 1) / denom;
    }
    return p;
}

PredictionSet full_conformal_set(std::span<const LabeledPoint> data, const ScoreRule& score, double alpha, double x,
                                 std::span<const double> grid) {
    check_alpha(alpha);
    const auto p = full_conformal_p_values(data, score, x, grid);
    const std::size_t g = grid.size();
    auto half_step_left = [&](std::size_t i) {
        if (g == 1) return 0.0;
        return i > 0 ? 0.5 * (grid[i] - grid[i - 1]) : 0.5 * (grid[1] - grid[0]);
    };
    auto half_step_right = [&](std::size_t i) {
        if (g == 1) return 0.0;
        return i + 1 < g ? 0.5 * (grid[i + 1] - grid[i]) : 0.5 * (grid[g - 1] - grid[g - 2]);
    };
    std::vector<ClosedInterval> intervals;
    std::size_t i = 0;
    while (i < g) {
        if (!(p[i] > alpha)) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < g && p[j + 1] > alpha) ++j;
        intervals.push_back({grid[i] - half_step_left(i), grid[j] + half_step_right(j)});
        i = j + 1;
    }
    return PredictionSet(std::move(intervals), 1.0 - alpha);
}

std::vector<double> default_grid(std::span<const LabeledPoint> data, std::size_t size) {
    if (data.empty()) throw DomainError("default_grid: empty data");
    if (size < 2) throw ParameterError("default_grid: need at least two points");
    double lo = data.front().y;
    double hi = lo;
    double mean = 0.0;
    for (const auto& pt : data) {
        lo = std::min(lo, pt.y);
        hi = std::max(hi, pt.y);
        mean += pt.y;
    }
    mean /= static_cast<double>(data.size());
    double ss = 0.0;
    for (const auto& pt : data) ss += (pt.y - mean) * (pt.y - mean);
    const double sd = data.size() > 1 ? std::sqrt(ss / static_cast<double>(data.size() - 1)) : 0.0;
    lo -= 4.0 * sd;
    hi += 4.0 * sd;
    if (hi == lo) {
        lo -= 1.0;
        hi += 1.0;
    }
    std::vector<double> grid(size);
    const double step = (hi - lo) / static_cast<double>(size - 1);
    for (std::size_t i = 0; i < size; ++i) grid[i] = lo + step * static_cast<double>(i);
    grid.back() = hi;
    return grid;
}

std::vector<double> cqr_scores(std::span<const LabeledPoint> data, const RealFn& lower, const RealFn& upper) {
    const ScoreRule rule = ScoreRule::cqr(lower, upper);
    std::vector<double> out;
    out.reserve(data.size());
    for (const auto& pt : data) out.push_back(rule(pt.x, pt.y));
    return out;
}

PredictionSet cqr_interval(const RealFn& lower, const RealFn& upper, std::span<const double> cal_scores, double alpha,
                           double x) {
    check_alpha(alpha);
    const double lo = lower(x);
    const double hi = upper(x);
    if (lo > hi) throw ValidationError("cqr_interval: quantile predictors cross at x");
    const double q = dist::empirical_quantile(cal_scores, 1.0 - alpha, dist::QuantileRule::Conformal);
    if (lo - q > hi + q) return PredictionSet({}, 1.0 - alpha);
    return PredictionSet({{lo - q, hi + q}}, 1.0 - alpha);
}

CoverageEstimate coverage_audit(const dist::ConditionalModel& model, const dist::UnivariateLaw& design, Method method,
                                double alpha, std::size_t n_cal, std::size_t reps, SeedSpec seed,
                                const CoverageOptions& options) {
    check_alpha(alpha);
    if (reps < 1) throw ParameterError("coverage_audit: reps must be at least 1");
    if (n_cal < 1) throw ParameterError("coverage_audit: n_cal must be at least 1");

    const RealFn mean = [&model](double x) { return model.mean(x); };
    const RealFn lower = [&model, alpha](double x) { return model.quantile_y(x, 0.5 * alpha); };
    const RealFn upper = [&model, alpha](double x) { return model.quantile_y(x, 1.0 - 0.5 * alpha); };
    const ScoreRule residual = ScoreRule::absolute_residual(mean);

    std::size_t covered = 0;
    std::vector<double> scores(n_cal);
    for (std::size_t rep = 0; rep < reps; ++rep) {
        Rng rng(seed.derive(rep));
        const auto cal = dist::sample_pairs(design, model, n_cal, rng);
        const auto test = dist::sample_pairs(design, model, 1, rng).front();
        PredictionSet set;
        switch (method) {
            case Method::Split:
                for (std::size_t i = 0; i < n_cal; ++i) scores[i] = std::abs(cal[i].y - model.mean(cal[i].x));
                set = split_conformal_interval(mean, scores, alpha, test.x);
                break;
            case Method::Cqr:
                scores = cqr_scores(cal, lower, upper);
                set = cqr_interval(lower, upper, scores, alpha, test.x);
                break;
            case Method::Full: {
                const auto grid = default_grid(cal, options.grid_size);
                set = full_conformal_set(cal, residual, alpha, test.x, grid);
                break;
            }
        }
        if (set.contains(test.y)) ++covered;
    }
    const double c = static_cast<double>(covered) / static_cast<double>(reps);
    return {c, std::sqrt(c * (1.0 - c) / static_cast<double>(reps)), reps};
}

}  // namespace cbench::conformal
