#include "cbench/deficiency.hpp"

#include "cbench/diagnostics.hpp"
#include "cbench/dist.hpp"
#include "cbench/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace cbench::deficiency {

namespace {

struct Bernoulli {
    std::size_t hits = 0;
    std::size_t total = 0;
    [[nodiscard]] double value() const { return static_cast<double>(hits) / static_cast<double>(total); }
    [[nodiscard]] double se() const {
        const double p = value();
        return std::sqrt(p * (1.0 - p) / static_cast<double>(total));
    }
};

struct Moments {
    double sum = 0.0;
    double sum_sq = 0.0;
    std::size_t count = 0;
    void add(double v) {
        sum += v;
        sum_sq += v * v;
        ++count;
    }
    [[nodiscard]] double mean() const { return sum / static_cast<double>(count); }
    [[nodiscard]] double se() const {
        const double n = static_cast<double>(count);
        return std::sqrt(std::max(0.0, (sum_sq - sum * sum / n) / (n - 1.0)) / n);
    }
};

bool first_rank_rule(const RankVector& ranks) {
    return 2 * ranks.front() > static_cast<int>(ranks.size()) + 1;
}

}  // namespace

void TestingProblem::validate() const {
    if (!(shift > 0.0) || !std::isfinite(shift)) throw ParameterError("TestingProblem: shift a must be positive");
    if (n < 1) throw ParameterError("TestingProblem: n must be at least 1");
}

RankVector rank_vector(std::span<const double> sample) {
    std::vector<std::size_t> order(sample.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sample[a] < sample[b]; });
    RankVector ranks(sample.size());
    for (std::size_t r = 0; r < order.size(); ++r) ranks[order[r]] = static_cast<int>(r + 1);
    return ranks;
}

std::size_t factorial(int n) {
    std::size_t f = 1;
    for (int i = 2; i <= n; ++i) f *= static_cast<std::size_t>(i);
    return f;
}

std::size_t pattern_index(const RankVector& ranks) {
    const int n = static_cast<int>(ranks.size());
    std::size_t index = 0;
    for (int i = 0; i < n; ++i) {
        std::size_t smaller_after = 0;
        for (int j = i + 1; j < n; ++j) {
            if (ranks[j] < ranks[i]) ++smaller_after;
        }
        index += smaller_after * factorial(n - 1 - i);
    }
    return index;
}

TestingRisks gaussian_testing_risks(double a, int n, std::size_t reps, SeedSpec seed) {
    TestingProblem{a, n}.validate();
    if (reps < 1) throw ParameterError("gaussian_testing_risks: reps must be at least 1");
    TestingRisks out;
    out.closed_form_full_risk = 0.5 * (1.0 - dist::tv_gaussian_shift(a, n));

    Bernoulli full{0, reps}, rank{0, reps}, constant{0, reps};
    std::vector<double> sample(static_cast<std::size_t>(n));
    for (std::size_t rep = 0; rep < reps; ++rep) {
        Rng rng(seed.derive(rep));
        const bool positive = rng.uniform() < 0.5;
        const double theta = positive ? a : -a;
        double sum = 0.0;
        for (double& y : sample) {
            y = theta + rng.normal();
            sum += y;
        }
        if ((sum > 0.0) != positive) ++full.hits;
        if (first_rank_rule(rank_vector(sample)) != positive) ++rank.hits;
        if (!positive) ++constant.hits;
    }
    out.full_risk_estimate = full.value();
    out.full_risk_se = full.se();
    out.rank_risk_estimate = rank.value();
    out.rank_risk_se = rank.se();
    out.constant_risk_estimate = constant.value();
    out.constant_risk_se = constant.se();

    if (n <= 6) {
        // Enumerate every permutation pattern; each has probability 1/n! under both hypotheses.
        RankVector ranks(static_cast<std::size_t>(n));
        std::iota(ranks.begin(), ranks.end(), 1);
        std::size_t plus = 0, minus = 0;
        do {
            if (first_rank_rule(ranks)) {
                ++plus;
            } else {
                ++minus;
            }
        } while (std::next_permutation(ranks.begin(), ranks.end()));
        // Under −a the rule errs on the `plus` patterns, under +a on the `minus` ones.
        out.rank_risk_enumerated = 0.5 * static_cast<double>(plus + minus) / static_cast<double>(factorial(n));
    } else {
        out.rank_risk_enumerated = std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

double deficiency_lower_bound(double a, int n) { return 0.5 * dist::tv_gaussian_shift(a, n); }

AncillarityReport rank_ancillarity_check(std::span<const double> theta_list, int n, std::size_t reps, SeedSpec seed,
                                         Family family) {
    if (n < 1 || n > 6) throw ParameterError("rank_ancillarity_check: n must lie in 1..6 for pattern enumeration");
    if (reps < 1000) throw ParameterError("rank_ancillarity_check: need at least 1000 replicates per theta");
    if (theta_list.empty()) throw ParameterError("rank_ancillarity_check: empty theta list");
    AncillarityReport out;
    out.patterns = factorial(n);
    out.counts.assign(theta_list.size(), std::vector<std::size_t>(out.patterns, 0));
    std::vector<double> sample(static_cast<std::size_t>(n));
    for (std::size_t t = 0; t < theta_list.size(); ++t) {
        const double theta = theta_list[t];
        const SeedSpec arm = seed.derive(t);
        for (std::size_t rep = 0; rep < reps; ++rep) {
            Rng rng(arm.derive(rep));
            for (double& y : sample) {
                const double z = rng.normal();
                y = family == Family::Location ? theta + z : std::exp(theta) * z;
            }
            ++out.counts[t][pattern_index(rank_vector(sample))];
        }
    }
    if (out.patterns == 1 || theta_list.size() == 1) {
        out.statistic = 0.0;
        out.p_value = 1.0;
        out.dof = 0;
        return out;
    }
    const auto chi = diagnostics::chi_square_homogeneity(out.counts);
    out.statistic = chi.statistic;
    out.p_value = chi.p_value;
    out.dof = chi.dof;
    return out;
}

RankMinimaxReport rank_minimax_location(double M, int n, std::size_t reps, SeedSpec seed, double constant) {
    if (!(M > 0.0) || !std::isfinite(M)) throw ParameterError("rank_minimax_location: M must be positive");
    if (n < 1) throw ParameterError("rank_minimax_location: n must be at least 1");
    if (reps < 2) throw ParameterError("rank_minimax_location: reps must be at least 2");
    RankMinimaxReport out;
    out.rank_only_lower_bound = M * M;
    out.full_data_risk = 1.0 / static_cast<double>(n);
    out.constant_worst_risk = std::max((constant - M) * (constant - M), (constant + M) * (constant + M));
    const double nn = static_cast<double>(n);
    out.rank_estimator_variance = (nn * nn - 1.0) / (12.0 * nn * nn);

    Moments mean_risk;
    Moments rank_risk[2];
    const double thetas[2] = {-M, M};
    std::vector<double> sample(static_cast<std::size_t>(n));
    for (std::size_t rep = 0; rep < reps; ++rep) {
        for (int side = 0; side < 2; ++side) {
            Rng rng(seed.derive(rep).derive(static_cast<std::uint64_t>(side)));
            double sum = 0.0;
            for (double& y : sample) {
                y = thetas[side] + rng.normal();
                sum += y;
            }
            if (side == 1) mean_risk.add((sum / nn - thetas[side]) * (sum / nn - thetas[side]));
            const auto ranks = rank_vector(sample);
            const double t = constant + (ranks.front() - 0.5 * (nn + 1.0)) / nn;
            rank_risk[side].add((t - thetas[side]) * (t - thetas[side]));
        }
    }
    out.mean_risk_estimate = mean_risk.mean();
    out.mean_risk_se = mean_risk.se();
    const int worst = rank_risk[0].mean() >= rank_risk[1].mean() ? 0 : 1;
    out.rank_estimator_worst_risk = rank_risk[worst].mean();
    out.rank_estimator_worst_se = rank_risk[worst].se();
    return out;
}

double exponential_log_likelihood(double rate, std::span<const double> data) {
    if (!(rate > 0.0)) throw ParameterError("exponential_log_likelihood: rate must be positive");
    const double total = std::accumulate(data.begin(), data.end(), 0.0);
    return static_cast<double>(data.size()) * std::log(rate) - rate * total;
}

RankWitness exp_family_rank_witness() {
    RankWitness w;
    w.first = {1.0, 2.0, 3.0};
    w.second = {1.0, 2.0, 30.0};
    w.ranks_first = rank_vector(w.first);
    w.ranks_second = rank_vector(w.second);
    w.ranks_equal = w.ranks_first == w.ranks_second;
    w.sum_first = std::accumulate(w.first.begin(), w.first.end(), 0.0);
    w.sum_second = std::accumulate(w.second.begin(), w.second.end(), 0.0);
    w.likelihood_ratio_first = std::exp(exponential_log_likelihood(2.0, w.first) - exponential_log_likelihood(1.0, w.first));
    w.likelihood_ratio_second =
        std::exp(exponential_log_likelihood(2.0, w.second) - exponential_log_likelihood(1.0, w.second));
    w.likelihood_ratios_differ = w.likelihood_ratio_first != w.likelihood_ratio_second;
    return w;
}

}  // namespace cbench::deficiency
