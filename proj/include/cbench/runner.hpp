#pragma once

#include "cbench/diagnostics.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cbench::cli {

enum class OutputFormat { Csv, Json, Both };

enum ExitCode : int {
    kExitPass = 0,
    kExitAssertionFailure = 1,
    kExitUsage = 2,
    kExitIo = 3,
};

/// Unwritable output directory or file.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Unset optionals fall back to each experiment's published defaults.
struct RunConfig {
    std::string subcommand = "all";
    double alpha = 0.1;
    std::optional<std::size_t> reps;
    std::uint64_t seed = 42;
    std::optional<std::size_t> n_cal;
    std::optional<std::size_t> m;
    std::optional<int> n;
    std::optional<double> a;
    std::optional<double> tau;
    std::optional<double> sigma;
    std::optional<std::size_t> grid_size;
    /// Extensionality control: use Unif[0,1] for both designs.
    bool identical_designs = false;
    std::filesystem::path out_dir;
    OutputFormat format = OutputFormat::Both;

    /// Throws ParameterError for an unknown subcommand, α ∉ (0,1) or reps = 0.
    void validate() const;
};

const std::vector<std::string>& subcommands();
/// $COHERENCE_BENCH_OUT if set, else "coherence-bench-out".
std::filesystem::path default_out_dir();

diagnostics::ExperimentReport run_coverage(const RunConfig& cfg);
diagnostics::ExperimentReport run_ranks(const RunConfig& cfg);
diagnostics::ExperimentReport run_extensionality(const RunConfig& cfg);
diagnostics::ExperimentReport run_cqr_transport(const RunConfig& cfg);
diagnostics::ExperimentReport run_deficiency(const RunConfig& cfg);
diagnostics::ExperimentReport run_ppi(const RunConfig& cfg);
diagnostics::ExperimentReport run_kernel_distance(const RunConfig& cfg);

/// Runs the experiment(s) named by cfg.subcommand.
std::vector<diagnostics::ExperimentReport> run_experiments(const RunConfig& cfg);

/// Writes <experiment_id>.csv and/or .json into `out_dir`; throws IoError with the path.
void write_reports(const std::vector<diagnostics::ExperimentReport>& reports, const std::filesystem::path& out_dir,
                   OutputFormat format);

/// Validates, runs, writes, and logs one summary line per experiment. Returns an ExitCode.
int run(const RunConfig& cfg, std::ostream& log);

}  // namespace cbench::cli
