#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mgritopt/circulant.hpp"
#include "mgritopt/experiment.hpp"
#include "mgritopt/opformat.hpp"
#include "mgritopt/optimize.hpp"
#include "mgritopt/solver.hpp"

namespace {

using mgritopt::ExperimentConfig;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitDnc = 2;
constexpr int kExitBudget = 3;

const std::vector<std::string> kConfigKeys = {
    "scheme", "order", "nx",  "nt",  "cfl",  "a",      "m",      "relax",
    "coarse", "weight_p", "tol", "cap", "seed", "output", "load_operator"};

std::string flag_name(const std::string& key) {
    std::string f = "--" + key;
    for (char& c : f) {
        if (c == '_') c = '-';
    }
    return f;
}

// Registers one string option per config key; values are applied on top of
// the config-file defaults after parsing, so flags always win.
struct ConfigFlags {
    std::string config_path;
    std::map<std::string, std::string> values;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "key=value config file to start from");
        for (const std::string& key : kConfigKeys) {
            cmd->add_option(flag_name(key), values[key], "override config field " + key);
        }
    }

    ExperimentConfig resolve(const CLI::App* cmd) const {
        ExperimentConfig config = config_path.empty()
                                      ? mgritopt::default_config()
                                      : mgritopt::load_config_file(config_path);
        for (const std::string& key : kConfigKeys) {
            if (cmd->count(flag_name(key)) > 0) {
                mgritopt::apply_override(config, key, values.at(key));
            }
        }
        return config;
    }
};

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path);
}

nlohmann::json config_json(const ExperimentConfig& c) {
    return {
        {"scheme", mgritopt::scheme_name(c.scheme)},
        {"order", c.order},
        {"nx", c.nx},
        {"nt", c.nt},
        {"cfl", c.cfl},
        {"a", c.a},
        {"m", c.m},
        {"relax", mgritopt::relax_name(c.relax)},
        {"coarse", mgritopt::coarse_mode_name(c.coarse)},
        {"weight_p", c.weight_p},
        {"tol", c.tol},
        {"cap", c.cap},
        {"seed", c.seed},
        {"load_operator", c.load_operator},
    };
}

int cmd_run(const ExperimentConfig& config, const std::string& history_path) {
    mgritopt::CellOutcome cell = mgritopt::run_cell(config);
    const mgritopt::ConvergenceReport& rep = cell.report;

    nlohmann::json report = {
        {"config", config_json(config)},
        {"iterations", rep.iterations},
        {"converged", rep.converged},
        {"dnc", rep.dnc},
        {"wall_seconds", rep.wall_seconds},
        {"residual_history", rep.history},
        {"coarse",
         {{"strategy", cell.coarse.strategy},
          {"objective_initial", cell.coarse.objective_initial},
          {"objective_final", cell.coarse.objective_final}}},
    };
    if (cell.coarse.nls.has_value()) {
        const mgritopt::NlsResult& nls = *cell.coarse.nls;
        report["coarse"]["nls"] = {
            {"evaluations", nls.evaluations},
            {"stop", mgritopt::nls_stop_name(nls.reason)},
            {"converged", nls.converged},
            {"residual_infnorm", nls.residual_infnorm},
            {"grad_inf_norm", nls.grad_inf_norm},
        };
    }
    if (!config.output.empty()) {
        write_text(config.output, report.dump(2) + "\n");
    }
    if (!history_path.empty()) {
        write_text(history_path, mgritopt::history_csv(rep));
    }

    const double ratio =
        rep.history.front() > 0.0 ? rep.history.back() / rep.history.front() : 0.0;
    if (rep.dnc) {
        std::printf("DNC: residual ratio %.3e after %d iterations (cap)\n", ratio,
                    rep.iterations);
        return kExitDnc;
    }
    std::printf("converged in %d iterations, residual ratio %.3e, %.3fs\n", rep.iterations,
                ratio, rep.wall_seconds);
    return kExitOk;
}

int cmd_optimize(const ExperimentConfig& config, const std::string& out_path) {
    if (config.coarse != mgritopt::CoarseMode::Trunc &&
        config.coarse != mgritopt::CoarseMode::Lls &&
        config.coarse != mgritopt::CoarseMode::Nls) {
        throw std::invalid_argument("optimize-op requires coarse mode trunc, lls, or nls");
    }
    mgritopt::validate(config);
    const mgritopt::TimeStepper phi = mgritopt::fine_stepper(config);
    mgritopt::CoarseBuild build = mgritopt::build_coarse(config, phi);

    mgritopt::OperatorFile file;
    file.scheme = config.scheme;
    file.order = config.order;
    file.m = config.m;
    file.relax = config.relax;
    file.strategy = build.strategy;
    file.objective_initial = build.objective_initial;
    file.objective_final = build.objective_final;
    file.psi = build.psi;
    mgritopt::write_operator_file(out_path, file);

    std::printf("%s operator written to %s (objective %.6e -> %.6e)\n",
                build.strategy.c_str(), out_path.c_str(), build.objective_initial,
                build.objective_final);
    if (build.nls.has_value()) {
        std::printf("optimizer: %ld evaluations, stop=%s, residual max %.3e\n",
                    build.nls->evaluations, mgritopt::nls_stop_name(build.nls->reason).c_str(),
                    build.nls->residual_infnorm);
        if (!build.nls->converged) return kExitBudget;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Two-level MGRIT/Parareal for 1-D periodic advection with optimized coarse "
        "operators"};
    app.require_subcommand(1);

    ConfigFlags run_flags;
    std::string run_history;
    CLI::App* run = app.add_subcommand(
        "run", "build operators per config, run the solver, report convergence");
    run_flags.attach(run);
    run->add_option("--history", run_history, "write residual-history CSV to this path");

    int table_which = 0;
    int table_max_exp = 8;
    bool table_dry = false;
    std::uint64_t table_seed = 0;
    std::string table_out;
    CLI::App* table =
        app.add_subcommand("replicate-table", "iteration-count table over the grid ladder");
    table->add_option("--table", table_which, "which table: 1 (explicit) or 2 (implicit)")
        ->required();
    table->add_option("--max-exp", table_max_exp,
                      "largest grid exponent to run (6..12; grids go 2^6, 2^8, ...)");
    table->add_flag("--dry-run", table_dry, "emit the row structure without solving");
    table->add_option("--seed", table_seed, "random initial-guess seed for every cell");
    table->add_option("--output", table_out, "CSV destination (default stdout)");

    ConfigFlags sweep_flags;
    bool sweep_dense = false;
    std::string sweep_out;
    CLI::App* sweep = app.add_subcommand(
        "estimate-sweep", "per-mode spectra with LFA and Dobrev convergence estimates");
    sweep_flags.attach(sweep);
    sweep->add_flag("--dense", sweep_dense,
                    "include dense per-mode norms (sizes up to 2^14 unknowns)");
    sweep->add_option("--sweep-output", sweep_out, "CSV destination (default stdout)");

    ConfigFlags opt_flags;
    std::string opt_out;
    CLI::App* opt = app.add_subcommand(
        "optimize-op", "synthesize a coarse operator and write it as a text file");
    opt_flags.attach(opt);
    opt->add_option("--operator-output", opt_out, "operator file destination")->required();

    ConfigFlags show_flags;
    CLI::App* show = app.add_subcommand(
        "show-config", "print the effective configuration as key=value text");
    show_flags.attach(show);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // --help and friends exit 0; every usage error maps to the error code.
        return app.exit(e) == 0 ? kExitOk : kExitError;
    }

    try {
        if (run->parsed()) {
            ExperimentConfig config = run_flags.resolve(run);
            return cmd_run(config, run_history);
        }
        if (table->parsed()) {
            const std::string csv =
                mgritopt::replicate_table(table_which, table_max_exp, table_dry, table_seed);
            write_text(table_out, csv);
            return kExitOk;
        }
        if (sweep->parsed()) {
            ExperimentConfig config = sweep_flags.resolve(sweep);
            write_text(sweep_out, mgritopt::estimate_sweep_csv(config, sweep_dense));
            return kExitOk;
        }
        if (opt->parsed()) {
            ExperimentConfig config = opt_flags.resolve(opt);
            return cmd_optimize(config, opt_out);
        }
        if (show->parsed()) {
            ExperimentConfig config = show_flags.resolve(show);
            std::cout << mgritopt::config_to_text(config);
            return kExitOk;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitError;
    }
    return kExitError;
}
