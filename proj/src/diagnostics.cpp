#include "cbench/diagnostics.hpp"

#include "cbench/special.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

namespace cbench::diagnostics {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

nlohmann::ordered_json json_real(double v) {
    if (std::isfinite(v)) return v;
    return format_real(v);
}

}  // namespace

std::string format_real(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

ChiSquareResult chi_square_gof(std::span<const std::size_t> observed, std::span<const double> expected,
                               double min_expected) {
    if (observed.size() != expected.size()) throw ValidationError("chi_square_gof: size mismatch");
    if (observed.size() < 2) throw ValidationError("chi_square_gof: need at least two cells (dof = 0)");
    const double total_p = std::accumulate(expected.begin(), expected.end(), 0.0);
    if (std::abs(total_p - 1.0) > 1e-9) throw ValidationError("chi_square_gof: expected probabilities must sum to 1");
    const auto n = static_cast<double>(std::accumulate(observed.begin(), observed.end(), std::size_t{0}));
    ChiSquareResult out;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        const double e = n * expected[i];
        if (!(e >= min_expected)) {
            std::ostringstream msg;
            msg << "chi_square_gof: expected count " << e << " in cell " << i << " is below " << min_expected;
            throw ValidationError(msg.str());
        }
        const double d = static_cast<double>(observed[i]) - e;
        out.statistic += d * d / e;
    }
    out.dof = static_cast<int>(observed.size()) - 1;
    out.p_value = chi_square_upper_tail(out.statistic, out.dof);
    return out;
}

ChiSquareResult chi_square_homogeneity(const std::vector<std::vector<std::size_t>>& table, double min_expected) {
    if (table.size() < 2) throw ValidationError("chi_square_homogeneity: need at least two rows");
    const std::size_t cols = table.front().size();
    for (const auto& row : table) {
        if (row.size() != cols) throw ValidationError("chi_square_homogeneity: ragged table");
    }
    std::vector<double> col_total(cols, 0.0);
    std::vector<double> row_total(table.size(), 0.0);
    double grand = 0.0;
    for (std::size_t r = 0; r < table.size(); ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            const auto v = static_cast<double>(table[r][c]);
            col_total[c] += v;
            row_total[r] += v;
            grand += v;
        }
    }
    std::size_t used_cols = 0;
    ChiSquareResult out;
    for (std::size_t c = 0; c < cols; ++c) {
        if (col_total[c] == 0.0) continue;
        ++used_cols;
        for (std::size_t r = 0; r < table.size(); ++r) {
            const double e = row_total[r] * col_total[c] / grand;
            if (!(e >= min_expected)) {
                std::ostringstream msg;
                msg << "chi_square_homogeneity: expected count " << e << " at (" << r << "," << c << ") is below "
                    << min_expected;
                throw ValidationError(msg.str());
            }
            const double d = static_cast<double>(table[r][c]) - e;
            out.statistic += d * d / e;
        }
    }
    out.dof = static_cast<int>((table.size() - 1) * (used_cols > 0 ? used_cols - 1 : 0));
    out.p_value = out.dof > 0 ? chi_square_upper_tail(out.statistic, out.dof) : 1.0;
    return out;
}

AssertionResult assert_within_se(double estimate, double target, std::optional<double> se, double k_sigmas) {
    const double diff = std::abs(estimate - target);
    if (!se) return {diff == 0.0, std::nullopt};
    if (*se < 0.0) throw ParameterError("assert_within_se: se must be nonnegative");
    const double margin = *se > 0.0 ? diff / *se : (diff == 0.0 ? 0.0 : kInf);
    return {diff <= k_sigmas * *se, margin};
}

AssertionResult assert_exceeds_by_se(double estimate, double target, double se, double k_sigmas) {
    if (se < 0.0) throw ParameterError("assert_exceeds_by_se: se must be nonnegative");
    const double diff = estimate - target;
    const double margin = se > 0.0 ? diff / se : (diff > 0.0 ? kInf : (diff == 0.0 ? 0.0 : -kInf));
    return {se > 0.0 ? diff >= k_sigmas * se : diff > 0.0, margin};
}

AssertionResult assert_true(bool condition) { return {condition, std::nullopt}; }

ExperimentReport::ExperimentReport(std::string experiment_id, SeedSpec seed) : id_(std::move(experiment_id)), seed_(seed) {}

void ExperimentReport::set_parameter(const std::string& key, const std::string& value) { params_[key] = value; }

void ExperimentReport::set_parameter(const std::string& key, double value) { params_[key] = format_real(value); }

Metric& ExperimentReport::add_metric(Metric metric) {
    if (metric.se && !std::isfinite(*metric.se))
        throw ValidationError("ExperimentReport: metric '" + metric.name + "' has a non-finite standard error");
    metrics_.push_back(std::move(metric));
    return metrics_.back();
}

Metric& ExperimentReport::record(const std::string& name, double estimate, std::optional<double> se) {
    return add_metric(Metric{name, estimate, se, std::nullopt, std::nullopt});
}

bool ExperimentReport::all_passed() const noexcept { return failures() == 0; }

std::size_t ExperimentReport::failures() const noexcept {
    return static_cast<std::size_t>(std::count_if(metrics_.begin(), metrics_.end(), [](const Metric& m) {
        return m.assertion && !m.assertion->pass;
    }));
}

std::string ExperimentReport::to_csv(bool header) const {
    std::ostringstream out;
    if (header) out << kCsvHeader << '\n';
    for (const auto& m : metrics_) {
        out << csv_field(id_) << ',' << csv_field(m.name) << ',' << format_real(m.estimate) << ','
            << (m.se ? format_real(*m.se) : "exact") << ',' << (m.target ? format_real(*m.target) : "") << ',';
        if (m.assertion) {
            out << (m.assertion->pass ? "true" : "false") << ','
                << (m.assertion->margin_se ? format_real(*m.assertion->margin_se) : "exact");
        } else {
            out << ',';
        }
        out << ',' << seed_.master_seed << ',' << csv_field(version()) << '\n';
    }
    return out.str();
}

std::string ExperimentReport::to_json() const {
    nlohmann::ordered_json doc;
    doc["experiment_id"] = id_;
    doc["version"] = version();
    doc["seed"] = {{"master_seed", seed_.master_seed}, {"stream_id", seed_.stream_id}};
    nlohmann::ordered_json params = nlohmann::ordered_json::object();
    for (const auto& [k, v] : params_) params[k] = v;
    doc["parameters"] = params;
    nlohmann::ordered_json metrics = nlohmann::ordered_json::array();
    for (const auto& m : metrics_) {
        nlohmann::ordered_json row;
        row["metric"] = m.name;
        row["estimate"] = json_real(m.estimate);
        row["se"] = m.se ? json_real(*m.se) : nlohmann::ordered_json("exact");
        row["target"] = m.target ? json_real(*m.target) : nlohmann::ordered_json(nullptr);
        if (m.assertion) {
            row["pass"] = m.assertion->pass;
            row["margin_se"] =
                m.assertion->margin_se ? json_real(*m.assertion->margin_se) : nlohmann::ordered_json("exact");
        } else {
            row["pass"] = nullptr;
            row["margin_se"] = nullptr;
        }
        metrics.push_back(std::move(row));
    }
    doc["metrics"] = metrics;
    doc["all_passed"] = all_passed();
    return doc.dump(2) + "\n";
}

EventSet FinitePartition::cell(std::size_t m) const {
    if (m >= size()) throw DomainError("FinitePartition: cell index out of range");
    const double lo = m == 0 ? -kInf : cuts[m - 1];
    const double hi = m == cuts.size() ? kInf : cuts[m];
    return EventSet({{lo, hi}});
}

}  // namespace cbench::diagnostics
