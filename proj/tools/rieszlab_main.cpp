// Command-line driver: <binary> <subcommand> --config <path> [--out <dir>]
// [--seed <u64>]. Subcommands: cantor-demo, transform, covers, claims,
// maxprin, equilibrium, report.

#include <CLI11.hpp>

#include <cstdio>

#include "experiment.hpp"

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for s-Riesz transforms of planar fractal measures"};
    app.require_subcommand(1);

    rieszlab::cli::ExperimentConfig cfg;
    std::string subcommand;

    std::string config_path;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "TOML config file");
        sub->add_option("--out", cfg.out_dir, "output directory");
        sub->add_option("--seed", cfg.seed, "corpus seed");
        sub->add_option("--id", cfg.id, "experiment id");
        sub->add_option("--s", cfg.s, "dimension parameter s");
        sub->add_option("--grid.L", cfg.grid_L, "grid half extent");
        sub->add_option("--grid.n", cfg.grid_n, "grid resolution (power of two)");
        sub->add_option("--measure.kind", cfg.measure_kind, "cantor | file");
        sub->add_option("--measure.generations", cfg.cantor_generations, "cantor generations");
        sub->add_option("--measure.kappa", cfg.cantor_kappa, "cantor sparseness");
        sub->add_option("--measure.mass", cfg.cantor_mass, "cantor total mass");
        sub->add_option("--measure.file", cfg.measure_file, "measure JSON file");
        sub->add_option("--construction.N", cfg.construction.levels, "cantor levels N");
        sub->add_option("--construction.eps", cfg.construction.eps, "epsilon");
        sub->add_option("--construction.M", cfg.construction.big_m, "M");
        sub->add_option("--construction.delta", cfg.construction.delta, "delta");
        sub->add_option("--construction.m", cfg.construction.half_mass,
                        "half mass (0 = from measure)");
        sub->add_option("--construction.H", cfg.construction.cover_budget, "cover budget H");
        sub->add_option("--construction.r_star", cfg.construction.r_star, "top cover scale");
        sub->add_option("--construction.rho_star", cfg.construction.rho_star,
                        "bottom cover scale");
        sub->add_option("--construction.A_max", cfg.a_max, "Psi dilation cutoff");
        sub->add_option("--construction.lambda_hat", cfg.lambda_hat,
                        "lambda = lambda_hat (m/H)^4");
        sub->add_option("--construction.lambda_abs", cfg.lambda_abs,
                        "absolute lambda override (0 = use lambda_hat)");
        sub->add_option("--corpus.maxprin_cases", cfg.maxprin_cases, "max principle cases");
        sub->add_option("--corpus.maxprin_v_cases", cfg.maxprin_v_cases, "V-version cases");
        sub->add_option("--corpus.psi_cases", cfg.psi_corpus_cases, "admissible nu cases");
    };

    for (const char* name : {"cantor-demo", "transform", "covers", "claims", "maxprin",
                             "equilibrium", "report"}) {
        CLI::App* sub = app.add_subcommand(name);
        add_common(sub);
        sub->callback([&, name] { subcommand = name; });
    }

    // Pre-scan for --config so the file loads before flags override it.
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--config") {
            try {
                rieszlab::cli::load_config_file(argv[i + 1], cfg);
            } catch (const std::exception& e) {
                std::fprintf(stderr, "config error: %s\n", e.what());
                return 2;
            }
        }
    }

    CLI11_PARSE(app, argc, argv);

    try {
        return rieszlab::cli::run(subcommand, cfg);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
