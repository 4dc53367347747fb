#pragma once

#include "cbench/random.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace cbench::deficiency {

/// Testing θ = −a against θ = +a from n i.i.d. N(θ,1) draws under 0–1 loss.
struct TestingProblem {
    double shift;
    int n;

    /// Throws ParameterError unless shift > 0 and n ≥ 1.
    void validate() const;
};

/// Ranks 1..n of a sample (rank 1 = smallest); a permutation of 1..n for tie-free samples.
using RankVector = std::vector<int>;

RankVector rank_vector(std::span<const double> sample);
/// Position of a rank vector in lexicographic order of permutations, in [0, n!).
std::size_t pattern_index(const RankVector& ranks);
std::size_t factorial(int n);

struct TestingRisks {
    /// (1 − TV)/2 with TV = 2Φ(a√n) − 1.
    double closed_form_full_risk = 0.0;
    /// Bayes risk (equal priors) of the sign-of-mean likelihood-ratio test.
    double full_risk_estimate = 0.0;
    double full_risk_se = 0.0;
    /// Rank-measurable rule: decide +a iff the rank of Y_1 exceeds (n+1)/2.
    double rank_risk_estimate = 0.0;
    double rank_risk_se = 0.0;
    /// Constant rule "always +a".
    double constant_risk_estimate = 0.0;
    double constant_risk_se = 0.0;
    /// Risk of the rank rule by exhaustive conditioning on the n! rank patterns, whose law is
    /// uniform under both hypotheses; exactly 1/2. Only computed for n ≤ 6 (else NaN).
    double rank_risk_enumerated = 0.0;
};

TestingRisks gaussian_testing_risks(double a, int n, std::size_t reps, SeedSpec seed);

/// ½·TV(N(−a,1)^⊗n, N(a,1)^⊗n).
double deficiency_lower_bound(double a, int n);

enum class Family {
    /// Y_i = θ + Z_i.
    Location,
    /// Y_i = e^θ·Z_i.
    Scale,
};

struct AncillarityReport {
    double statistic = 0.0;
    double p_value = 1.0;
    int dof = 0;
    std::size_t patterns = 1;
    /// counts[t][pattern] for theta_list[t].
    std::vector<std::vector<std::size_t>> counts;
};

/// Pooled χ² homogeneity test of rank-pattern frequencies across θ values, Z_i i.i.d. N(0,1).
/// Throws ParameterError for n > 6, n < 1 or reps < 1000.
AncillarityReport rank_ancillarity_check(std::span<const double> theta_list, int n, std::size_t reps, SeedSpec seed,
                                         Family family = Family::Location);

struct RankMinimaxReport {
    /// M²: no rank-measurable estimator has worst-case squared-error risk below this on [−M, M].
    double rank_only_lower_bound = 0.0;
    /// 1/n, the risk of the sample mean at every θ.
    double full_data_risk = 0.0;
    double mean_risk_estimate = 0.0;
    double mean_risk_se = 0.0;
    /// Constant estimator c: max over θ ∈ {−M, M} of (c − θ)².
    double constant_worst_risk = 0.0;
    /// T = c + (R_1 − (n+1)/2)/n, a rank-measurable estimator: MC worst risk over θ ∈ {−M, M}.
    double rank_estimator_worst_risk = 0.0;
    double rank_estimator_worst_se = 0.0;
    /// Var(T) = (n² − 1)/(12n²).
    double rank_estimator_variance = 0.0;
};

RankMinimaxReport rank_minimax_location(double M, int n, std::size_t reps, SeedSpec seed, double constant = 0.0);

struct RankWitness {
    std::vector<double> first;
    std::vector<double> second;
    RankVector ranks_first;
    RankVector ranks_second;
    bool ranks_equal = false;
    double sum_first = 0.0;
    double sum_second = 0.0;
    /// λ₂ⁿe^{−λ₂T}/(λ₁ⁿe^{−λ₁T}) for each dataset at (λ₁, λ₂) = (1, 2).
    double likelihood_ratio_first = 0.0;
    double likelihood_ratio_second = 0.0;
    bool likelihood_ratios_differ = false;
};

/// (1,2,3) and (1,2,30): identical ranks, different exponential-family sufficient statistics.
RankWitness exp_family_rank_witness();

/// Exponential(λ) log-likelihood n·log λ − λ·Σy.
double exponential_log_likelihood(double rate, std::span<const double> data);

}  // namespace cbench::deficiency
