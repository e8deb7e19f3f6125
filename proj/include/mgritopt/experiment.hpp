#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mgritopt/optimize.hpp"
#include "mgritopt/solver.hpp"
#include "mgritopt/types.hpp"

namespace mgritopt {

enum class CoarseMode { Redisc, Trunc, Lls, Nls, Exact };

std::string coarse_mode_name(CoarseMode mode);
CoarseMode coarse_mode_from_name(const std::string& name);

struct ExperimentConfig {
    Scheme scheme = Scheme::SDIRK3;
    int order = 3;
    int nx = 64;
    int nt = 64;
    double cfl = 1.0;
    double a = 1.0;
    int m = 2;
    Relax relax = Relax::F;
    CoarseMode coarse = CoarseMode::Redisc;
    double weight_p = -1.0;  // negative = default: 40 for order 2, 20 for order 3
    double tol = 1e-10;
    int cap = 50;
    std::uint64_t seed = 0;
    std::string output;         // optional report destination (used by the CLI)
    std::string load_operator;  // optional operator file overriding the coarse build
    NlsControls controls;
};

// Throws on invalid combinations (e.g. trunc/lls with an implicit scheme).
void validate(const ExperimentConfig& config);

double resolved_weight_p(const ExperimentConfig& config);
double grid_dx(int nx);                          // domain (-1, 1]
double grid_dt(const ExperimentConfig& config);  // cfl * dx / a

// g(x) = sin(pi x) sampled at x_j = -1 + 2 j / nx.
std::vector<double> initial_condition(int nx);

TimeStepper fine_stepper(const ExperimentConfig& config);

struct CoarseBuild {
    TimeStepper psi;
    std::string strategy;
    double objective_initial = 0.0;  // ||p||^2 before/after optimization; equal
    double objective_final = 0.0;    // for the non-iterative strategies
    std::optional<NlsResult> nls;
};

// Builds the coarse operator per config.coarse, or loads config.load_operator
// when set.
CoarseBuild build_coarse(const ExperimentConfig& config, const TimeStepper& phi);

struct CellOutcome {
    TimeStepper phi;
    CoarseBuild coarse;
    ConvergenceReport report;
    std::vector<std::vector<double>> solution;
};

CellOutcome run_cell(const ExperimentConfig& config);

// Iteration-count table over the grid ladder 2^6, 2^8, ..., up to
// 2^max_exponent (max 12). which=1: explicit schemes, weighted linear vs
// nonlinear least squares columns. which=2: implicit scheme, rediscretization
// vs nonlinear columns over relaxation and coarsening variants. dry_run emits
// the row structure without solving. Returns CSV text.
std::string replicate_table(int which, int max_exponent, bool dry_run, std::uint64_t seed);

// Per-mode CSV: wavenumber, lambda_k, mu_k, LFA and Dobrev values, plus dense
// per-mode norms when include_dense and the size cap allows. Worst-case
// summary appended as comment lines.
std::string estimate_sweep_csv(const ExperimentConfig& config, bool include_dense);

// Flat key=value config text; '#' starts a comment.
ExperimentConfig default_config();
void apply_override(ExperimentConfig& config, const std::string& key, const std::string& value);
ExperimentConfig load_config_file(const std::string& path);
std::string config_to_text(const ExperimentConfig& config);

// History CSV rows: iteration, absolute norm, relative norm.
std::string history_csv(const ConvergenceReport& report);

}  // namespace mgritopt
