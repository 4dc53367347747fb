#include "cbench/rankgap.hpp"

#include "cbench/errors.hpp"
#include "cbench/quadrature.hpp"
#include "cbench/special.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

namespace cbench::rankgap {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Linear-interpolation sample quantile on sorted data.
double interpolated_quantile(const std::vector<double>& sorted, double p) {
    const double h = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

const QuadratureOptions kKernelQuadrature{1e-11, 0.0, 2000};
constexpr std::array<double, 8> kTailBreaks{0.0, 1.0, 2.0, 4.0, 8.0, 16.0, 28.0, 45.0};
constexpr std::array<double, 11> kNormalBreaks{-12.0, -8.0, -5.0, -3.0, -1.5, 0.0, 1.5, 3.0, 5.0, 8.0, 12.0};

double bridged_cdf(const BridgedKernel& k, double y) {
    const auto& cuts = k.cells.cuts();
    const std::size_t n = cuts.size();
    const auto j = static_cast<std::size_t>(std::upper_bound(cuts.begin(), cuts.end(), y) - cuts.begin());
    const double s = k.completion.tail_scale;
    if (j == 0) return k.mass[0].to_double() * std::exp((y - cuts.front()) / s);
    if (j == n) return k.cumulative[n] + k.mass[n].to_double() * -std::expm1(-(y - cuts.back()) / s);
    const double width = cuts[j] - cuts[j - 1];
    return k.cumulative[j] + k.mass[j].to_double() * (y - cuts[j - 1]) / width;
}

double bridged_quantile(const BridgedKernel& k, double p) {
    const auto& cuts = k.cells.cuts();
    const std::size_t n = cuts.size();
    std::size_t cell = 0;
    while (cell < n && (k.cumulative[cell + 1] < p || k.mass[cell].num() == 0)) ++cell;
    const double m = k.mass[cell].to_double();
    const double s = k.completion.tail_scale;
    if (cell == 0) return cuts.front() + s * std::log(p / m);
    if (cell == n) return cuts.back() - s * std::log((1.0 - p) / m);
    const double lo = cuts[cell - 1];
    const double hi = cuts[cell];
    if (lo == hi) return lo;
    return std::clamp(lo + (p - k.cumulative[cell]) / m * (hi - lo), lo, hi);
}

double bridged_integrate(const BridgedKernel& k, const std::function<double(double)>& f) {
    const auto& cuts = k.cells.cuts();
    const std::size_t n = cuts.size();
    const double s = k.completion.tail_scale;
    double total = 0.0;
    for (std::size_t cell = 0; cell <= n; ++cell) {
        const double m = k.mass[cell].to_double();
        if (m == 0.0) continue;
        double conditional = 0.0;
        if (cell == 0) {
            const double edge = cuts.front();
            conditional = integrate([&](double t) { return f(edge - s * t) * std::exp(-t); }, kTailBreaks,
                                    kKernelQuadrature)
                              .value;
        } else if (cell == n) {
            const double edge = cuts.back();
            conditional = integrate([&](double t) { return f(edge + s * t) * std::exp(-t); }, kTailBreaks,
                                    kKernelQuadrature)
                              .value;
        } else if (cuts[cell - 1] == cuts[cell]) {
            conditional = f(cuts[cell]);
        } else {
            const double lo = cuts[cell - 1];
            const double hi = cuts[cell];
            conditional = integrate(f, lo, hi, kKernelQuadrature).value / (hi - lo);
        }
        total += m * conditional;
    }
    return total;
}

}  // namespace

// OrderCells

OrderCells OrderCells::from_values(std::span<const double> values) {
    if (values.empty()) throw DomainError("order_cells: empty input");
    OrderCells out;
    out.cuts_.assign(values.begin(), values.end());
    for (double v : out.cuts_) {
        if (!std::isfinite(v)) throw ParameterError("order_cells: values must be finite");
    }
    std::sort(out.cuts_.begin(), out.cuts_.end());
    return out;
}

double OrderCells::lower(std::size_t k) const {
    if (k > n()) throw DomainError("OrderCells: cell index out of range");
    return k == 0 ? -kInf : cuts_[k - 1];
}

double OrderCells::upper(std::size_t k) const {
    if (k > n()) throw DomainError("OrderCells: cell index out of range");
    return k == n() ? kInf : cuts_[k];
}

std::size_t OrderCells::cell_index(double y) const noexcept {
    return static_cast<std::size_t>(std::lower_bound(cuts_.begin(), cuts_.end(), y) - cuts_.begin());
}

OrderCells OrderCells::insert(double y_new) const {
    if (!std::isfinite(y_new)) throw ParameterError("insert_and_recurse: value must be finite");
    OrderCells out = *this;
    out.cuts_.insert(std::upper_bound(out.cuts_.begin(), out.cuts_.end(), y_new), y_new);
    return out;
}

OrderCells order_cells(std::span<const double> values) { return OrderCells::from_values(values); }

OrderCells insert_and_recurse(const OrderCells& cells, double y_new) { return cells.insert(y_new); }

// Masses

RankGapMass::RankGapMass(std::vector<Rational> masses) : masses_(std::move(masses)) {
    if (masses_.empty()) throw ParameterError("RankGapMass: no cells");
    Rational total;
    for (const auto& m : masses_) {
        if (m < Rational(0)) throw ParameterError("RankGapMass: negative mass");
        total += m;
    }
    if (!(total == Rational(1))) throw ParameterError("RankGapMass: masses sum to " + total.str() + ", not 1");
}

std::vector<double> RankGapMass::probabilities() const {
    std::vector<double> out;
    out.reserve(masses_.size());
    for (const auto& m : masses_) out.push_back(m.to_double());
    return out;
}

RankGapMass hill_mass(std::size_t n) {
    if (n < 1) throw ParameterError("hill_mass: n must be at least 1");
    return RankGapMass(std::vector<Rational>(n + 1, Rational(1, static_cast<std::int64_t>(n + 1))));
}

std::vector<double> next_rank_distribution(std::size_t n) {
    if (n < 1) throw ParameterError("next_rank_distribution: n must be at least 1");
    return std::vector<double>(n + 1, 1.0 / static_cast<double>(n + 1));
}

std::vector<std::size_t> simulate_next_ranks(std::size_t n, std::size_t reps, SeedSpec seed) {
    if (n < 1) throw ParameterError("simulate_next_ranks: n must be at least 1");
    std::vector<std::size_t> counts(n + 1, 0);
    std::vector<double> past(n);
    for (std::size_t rep = 0; rep < reps; ++rep) {
        Rng rng(seed.derive(rep));
        for (double& v : past) v = rng.normal();
        const double fresh = rng.normal();
        const auto below = std::count_if(past.begin(), past.end(), [fresh](double v) { return v < fresh; });
        ++counts[static_cast<std::size_t>(below)];
    }
    return counts;
}

WithinCellCompletion WithinCellCompletion::from_data(std::span<const double> values) {
    if (values.empty()) throw DomainError("WithinCellCompletion: empty data");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double iqr = interpolated_quantile(sorted, 0.75) - interpolated_quantile(sorted, 0.25);
    return WithinCellCompletion{std::max(iqr, 1e-6)};
}

// Kernels

PredictiveKernel bridge_kernel(const OrderCells& cells, const RankGapMass& mass, const WithinCellCompletion& completion) {
    if (mass.size() != cells.cell_count())
        throw ParameterError("bridge_kernel: mass has " + std::to_string(mass.size()) + " entries for " +
                             std::to_string(cells.cell_count()) + " cells");
    if (!(completion.tail_scale > 0.0) || !std::isfinite(completion.tail_scale))
        throw ParameterError("bridge_kernel: tail scale must be positive");
    std::vector<double> cumulative(mass.size() + 1, 0.0);
    Rational running;
    for (std::size_t k = 0; k < mass.size(); ++k) {
        running += mass[k];
        cumulative[k + 1] = running.to_double();
    }
    return PredictiveKernel(BridgedKernel{cells, mass, completion, std::move(cumulative)});
}

PredictiveKernel hill_bridge(std::span<const double> values) {
    const auto cells = order_cells(values);
    return bridge_kernel(cells, hill_mass(cells.n()), WithinCellCompletion::from_data(values));
}

PredictiveKernel bayes_predictive(const ConjugatePrior& prior, double noise_variance, std::span<const double> data) {
    if (!(prior.variance > 0.0) || std::isnan(prior.variance))
        throw ParameterError("bayes_predictive: prior variance must be positive");
    if (!(noise_variance > 0.0) || !std::isfinite(noise_variance))
        throw ParameterError("bayes_predictive: noise variance must be positive");
    if (!std::isfinite(prior.mean)) throw ParameterError("bayes_predictive: prior mean must be finite");
    ConjugateGaussianKernel k;
    k.prior_mean = prior.mean;
    k.prior_variance = prior.variance;
    k.noise_variance = noise_variance;
    k.count = data.size();
    // Summed in sorted order so the result does not depend on the order of the data.
    std::vector<double> sorted(data.begin(), data.end());
    std::sort(sorted.begin(), sorted.end());
    k.sum = std::accumulate(sorted.begin(), sorted.end(), 0.0);
    const double prior_precision = std::isinf(prior.variance) ? 0.0 : 1.0 / prior.variance;
    const double precision = prior_precision + static_cast<double>(k.count) / noise_variance;
    if (precision == 0.0) throw ParameterError("bayes_predictive: flat prior needs at least one observation");
    k.posterior_variance = 1.0 / precision;
    k.posterior_mean = (prior_precision * prior.mean + k.sum / noise_variance) * k.posterior_variance;
    return PredictiveKernel(k);
}

double PredictiveKernel::cdf(double y) const {
    if (std::isnan(y)) throw DomainError("PredictiveKernel::cdf: NaN");
    if (y == -kInf) return 0.0;
    if (y == kInf) return 1.0;
    return std::visit(Overloaded{
                          [y](const BridgedKernel& k) { return bridged_cdf(k, y); },
                          [y](const ConjugateGaussianKernel& k) {
                              return normal_cdf((y - k.predictive_mean()) / std::sqrt(k.predictive_variance()));
                          },
                      },
                      v_);
}

double PredictiveKernel::quantile(double p) const {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("PredictiveKernel::quantile: p must lie in (0,1)");
    return std::visit(Overloaded{
                          [p](const BridgedKernel& k) { return bridged_quantile(k, p); },
                          [p](const ConjugateGaussianKernel& k) {
                              return k.predictive_mean() + std::sqrt(k.predictive_variance()) * normal_quantile(p);
                          },
                      },
                      v_);
}

double PredictiveKernel::draw(Rng& rng) const { return quantile(rng.uniform()); }

std::vector<double> PredictiveKernel::sample(std::size_t n, SeedSpec seed) const {
    Rng rng(seed);
    std::vector<double> out(n);
    for (double& v : out) v = draw(rng);
    return out;
}

McEstimate PredictiveKernel::expect(const std::function<double(double)>& f, std::size_t mc_size, SeedSpec seed) const {
    if (mc_size < 2) throw ParameterError("PredictiveKernel::expect: mc_size must be at least 2");
    Rng rng(seed);
    double mean = 0.0;
    double m2 = 0.0;
    for (std::size_t i = 0; i < mc_size; ++i) {
        const double v = f(draw(rng));
        const double delta = v - mean;
        mean += delta / static_cast<double>(i + 1);
        m2 += delta * (v - mean);
    }
    const double var = m2 / static_cast<double>(mc_size - 1);
    return {mean, std::sqrt(var / static_cast<double>(mc_size))};
}

double PredictiveKernel::integrate(const std::function<double(double)>& f) const {
    return std::visit(Overloaded{
                          [&](const BridgedKernel& k) { return bridged_integrate(k, f); },
                          [&](const ConjugateGaussianKernel& k) {
                              const double mu = k.predictive_mean();
                              const double sd = std::sqrt(k.predictive_variance());
                              return cbench::integrate([&](double z) { return f(mu + sd * z) * normal_pdf(z); },
                                                       kNormalBreaks, kKernelQuadrature)
                                  .value;
                          },
                      },
                      v_);
}

std::string PredictiveKernel::describe() const {
    std::ostringstream out;
    std::visit(Overloaded{
                   [&](const BridgedKernel& k) {
                       out << "variant=bridged\n";
                       out << "n=" << k.cells.n() << "\n";
                       out << "cuts=";
                       for (std::size_t i = 0; i < k.cells.n(); ++i) out << (i ? "," : "") << fmt17(k.cells.cuts()[i]);
                       out << "\nmasses=";
                       for (std::size_t i = 0; i < k.mass.size(); ++i) out << (i ? "," : "") << k.mass[i].str();
                       out << "\ninterior=uniform\ntails=exponential\ntail_scale=" << fmt17(k.completion.tail_scale)
                           << "\n";
                   },
                   [&](const ConjugateGaussianKernel& k) {
                       out << "variant=conjugate-gaussian\n";
                       out << "prior_mean=" << fmt17(k.prior_mean) << "\n";
                       out << "prior_variance=" << fmt17(k.prior_variance) << "\n";
                       out << "noise_variance=" << fmt17(k.noise_variance) << "\n";
                       out << "n=" << k.count << "\n";
                       out << "sum=" << fmt17(k.sum) << "\n";
                       out << "predictive_mean=" << fmt17(k.predictive_mean()) << "\n";
                       out << "predictive_variance=" << fmt17(k.predictive_variance()) << "\n";
                   },
               },
               v_);
    return out.str();
}

// Metric

double TestFunction::operator()(double y) const { return std::tanh(a * y + b) / std::max(1.0, a); }

std::vector<TestFunction> KernelMetricConfig::default_test_functions() {
    std::vector<TestFunction> out;
    for (double a : {0.5, 1.0, 2.0, 4.0}) {
        for (double b : {-2.0, -0.5, 0.5, 2.0}) out.push_back({a, b});
    }
    return out;
}

KernelFeatureSample::KernelFeatureSample(std::span<const KernelBuilder> builders, std::size_t n,
                                         const KernelMetricConfig& cfg, SeedSpec seed)
    : mc_size_(cfg.mc_size), functions_(cfg.functions.size()) {
    if (cfg.mc_size < 2) throw ParameterError("kernel_distance: mc_size must be at least 2");
    if (cfg.functions.empty()) throw ParameterError("kernel_distance: no test functions");
    if (n < 1) throw ParameterError("kernel_distance: history length must be at least 1");
    features_.assign(builders.size(), std::vector<double>(mc_size_ * functions_));
    std::vector<double> history(n);
    for (std::size_t h = 0; h < mc_size_; ++h) {
        Rng rng(seed.derive(h));
        for (double& v : history) v = rng.normal();
        for (std::size_t b = 0; b < builders.size(); ++b) {
            const PredictiveKernel kernel = builders[b](history);
            for (std::size_t j = 0; j < functions_; ++j) {
                features_[b][h * functions_ + j] = kernel.integrate(cfg.functions[j]);
            }
        }
    }
}

McEstimate KernelFeatureSample::distance(std::size_t a, std::size_t b) const {
    const auto& fa = features_.at(a);
    const auto& fb = features_.at(b);
    const auto count = static_cast<double>(mc_size_);
    std::vector<double> mean_sq(functions_, 0.0);
    for (std::size_t h = 0; h < mc_size_; ++h) {
        for (std::size_t j = 0; j < functions_; ++j) {
            const double d = fa[h * functions_ + j] - fb[h * functions_ + j];
            mean_sq[j] += d * d;
        }
    }
    double estimate = 0.0;
    std::vector<double> gradient(functions_, 0.0);
    double weight = 0.5;
    for (std::size_t j = 0; j < functions_; ++j, weight *= 0.5) {
        mean_sq[j] /= count;
        const double norm = std::sqrt(mean_sq[j]);
        estimate += weight * std::min(norm, 1.0);
        if (norm > 0.0 && norm < 1.0) gradient[j] = weight / (2.0 * norm);
    }
    // Delta method: linearise Σ w_j √m_j around the sample means of the squared differences.
    double lin_mean = 0.0;
    double lin_m2 = 0.0;
    for (std::size_t h = 0; h < mc_size_; ++h) {
        double lin = 0.0;
        for (std::size_t j = 0; j < functions_; ++j) {
            const double d = fa[h * functions_ + j] - fb[h * functions_ + j];
            lin += gradient[j] * d * d;
        }
        const double delta = lin - lin_mean;
        lin_mean += delta / static_cast<double>(h + 1);
        lin_m2 += delta * (lin - lin_mean);
    }
    const double se = std::sqrt(lin_m2 / (count - 1.0) / count);
    return {estimate, se};
}

McEstimate kernel_distance(const KernelBuilder& k1, const KernelBuilder& k2, std::size_t n,
                           const KernelMetricConfig& cfg, SeedSpec seed) {
    const std::array<KernelBuilder, 2> builders{k1, k2};
    return KernelFeatureSample(builders, n, cfg, seed).distance(0, 1);
}

// Belief functions and invariance

BeliefPlausibility belief_plausibility(const RankGapMass& mass, const OrderCells& cells, const EventSet& event) {
    if (mass.size() != cells.cell_count()) throw ParameterError("belief_plausibility: mass/cell count mismatch");
    BeliefPlausibility out;
    for (std::size_t k = 0; k < cells.cell_count(); ++k) {
        const double lo = cells.lower(k);
        const double hi = cells.upper(k);
        if (event.covers(lo, hi)) out.belief += mass[k];
        if (event.meets(lo, hi)) out.plausibility += mass[k];
    }
    return out;
}

bool rank_invariance_check(const KernelBuilder& builder, std::span<const double> data,
                           std::span<const std::size_t> permutation) {
    if (permutation.size() != data.size()) throw ParameterError("rank_invariance_check: permutation size mismatch");
    std::vector<bool> seen(data.size(), false);
    std::vector<double> permuted(data.size());
    for (std::size_t i = 0; i < permutation.size(); ++i) {
        const std::size_t p = permutation[i];
        if (p >= data.size() || seen[p]) throw ParameterError("rank_invariance_check: not a permutation");
        seen[p] = true;
        permuted[i] = data[p];
    }
    return builder(data) == builder(permuted);
}

}  // namespace cbench::rankgap
