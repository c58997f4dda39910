#ifndef RIESZLAB_TOOLS_EXPERIMENT_HPP
#define RIESZLAB_TOOLS_EXPERIMENT_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rieszlab/params.hpp"
#include "rieszlab/report.hpp"

namespace rieszlab::cli {

/// Everything an experiment run needs; loaded from a TOML config plus
/// command-line overrides. The seed fixes all randomized corpora.
struct ExperimentConfig {
    std::string id = "experiment";
    double s = 1.5;
    std::uint64_t seed = 1;
    std::string out_dir = "out";

    // grid
    double grid_L = 8.0;
    int grid_n = 256;

    // measure
    std::string measure_kind = "cantor"; // cantor | file
    int cantor_generations = 3;
    double cantor_kappa = 8.0;
    double cantor_mass = 1.0;
    std::string measure_file;

    // construction parameters; half_mass 0 means "half the measure mass"
    ConstructionParams construction;
    ExperimentConfig() { construction.half_mass = 0.0; }
    int a_max = 8;
    double lambda_hat = 1.0;
    double lambda_abs = 0.0; // 0: use lambda_hat (m/H)^4

    // corpus sizes
    int maxprin_cases = 100;
    int maxprin_v_cases = 25;
    int psi_corpus_cases = 10;

    /// Violated constraints in the declared N, eps, M, delta order; empty
    /// when the config is valid.
    std::vector<std::string> validate() const;
    /// Canonical text form (hashed into artifact headers).
    std::string canonical() const;
};

/// Strict TOML-subset loader for the experiment config: [section] headers,
/// key = value scalars, # comments. Unknown keys are errors. Command-line
/// flags are applied after the file, so they override it.
void load_config_file(const std::string& path, ExperimentConfig& cfg);

struct RunResult {
    std::vector<EstimateReport> reports;
    bool all_pass() const {
        for (const auto& r : reports)
            if (!r.pass) return false;
        return true;
    }
};

RunResult run_cantor_demo(const ExperimentConfig& cfg);
RunResult run_transform(const ExperimentConfig& cfg);
RunResult run_covers(const ExperimentConfig& cfg);
RunResult run_claims(const ExperimentConfig& cfg);
RunResult run_maxprin(const ExperimentConfig& cfg);
RunResult run_equilibrium(const ExperimentConfig& cfg);
RunResult run_report(const ExperimentConfig& cfg);

/// Shared entry: validates, dispatches, writes artifacts, returns the exit
/// code (0 pass, 1 check failures, 2 config errors).
int run(const std::string& subcommand, const ExperimentConfig& cfg);

} // namespace rieszlab::cli

#endif
