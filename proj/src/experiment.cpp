#include "mgritopt/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "mgritopt/circulant.hpp"
#include "mgritopt/discretization.hpp"
#include "mgritopt/estimates.hpp"
#include "mgritopt/opformat.hpp"

namespace mgritopt {

namespace {

std::string fmt_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::string coarse_mode_name(CoarseMode mode) {
    switch (mode) {
        case CoarseMode::Redisc: return "redisc";
        case CoarseMode::Trunc: return "trunc";
        case CoarseMode::Lls: return "lls";
        case CoarseMode::Nls: return "nls";
        case CoarseMode::Exact: return "exact";
    }
    throw std::logic_error("unknown coarse mode");
}

CoarseMode coarse_mode_from_name(const std::string& name) {
    if (name == "redisc") return CoarseMode::Redisc;
    if (name == "trunc") return CoarseMode::Trunc;
    if (name == "lls") return CoarseMode::Lls;
    if (name == "nls") return CoarseMode::Nls;
    if (name == "exact") return CoarseMode::Exact;
    throw std::invalid_argument("unknown coarse mode: " + name);
}

void validate(const ExperimentConfig& config) {
    if (config.order != 2 && config.order != 3) {
        throw std::invalid_argument("spatial order must be 2 or 3");
    }
    if (config.nx < 5) throw std::invalid_argument("nx must be at least 5");
    if (config.m < 2) throw std::invalid_argument("m must be at least 2");
    if (config.nt < config.m || config.nt % config.m != 0) {
        throw std::invalid_argument("nt must be a positive multiple of m");
    }
    if (!(config.cfl > 0.0)) throw std::invalid_argument("cfl must be positive");
    if (!(config.a > 0.0)) throw std::invalid_argument("wave speed must be positive");
    if (!(config.tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
    if (config.cap < 1) throw std::invalid_argument("iteration cap must be positive");
    if (config.relax == Relax::C) {
        throw std::invalid_argument("experiments use F or FCF relaxation");
    }
    if ((config.coarse == CoarseMode::Trunc || config.coarse == CoarseMode::Lls) &&
        !is_explicit(config.scheme)) {
        throw std::invalid_argument(
            "trunc/lls build sparse explicit operators; use redisc or nls for implicit schemes");
    }
}

double resolved_weight_p(const ExperimentConfig& config) {
    if (config.weight_p >= 0.0) return config.weight_p;
    return config.order == 2 ? 40.0 : 20.0;
}

double grid_dx(int nx) { return 2.0 / nx; }

double grid_dt(const ExperimentConfig& config) {
    return config.cfl * grid_dx(config.nx) / config.a;
}

std::vector<double> initial_condition(int nx) {
    std::vector<double> g(static_cast<size_t>(nx));
    for (int j = 0; j < nx; ++j) {
        g[j] = std::sin(std::numbers::pi * (-1.0 + 2.0 * j / nx));
    }
    return g;
}

TimeStepper fine_stepper(const ExperimentConfig& config) {
    const CirculantStencil L =
        spatial_stencil(config.order, config.a, grid_dx(config.nx), config.nx);
    return build_time_stepper(L, tableau(config.scheme), grid_dt(config));
}

namespace {

NlsContext make_nls_context(const ExperimentConfig& config, const TimeStepper& phi) {
    NlsContext ctx;
    ctx.phi = phi;
    ctx.m = config.m;
    ctx.nt = config.nt;
    ctx.relax = config.relax;
    ctx.controls = config.controls;
    ctx.pattern_e = support_pattern(phi.explicit_part);
    if (is_explicit(config.scheme)) {
        ctx.pattern_i = make_pattern({0}, phi.nx());
        ctx.init_weights = power_weights(stepper_spectrum(phi), resolved_weight_p(config));
    } else {
        ctx.pattern_i = support_pattern(phi.implicit_part);
        const CirculantStencil L =
            spatial_stencil(config.order, config.a, grid_dx(config.nx), config.nx);
        ctx.init = rediscretized_coarse(L, tableau(config.scheme), config.m, grid_dt(config));
    }
    return ctx;
}

SparsityPattern pattern_or_zero(const CirculantStencil& col) {
    for (double v : col.c) {
        if (v != 0.0) return support_pattern(col);
    }
    return make_pattern({0}, col.nx());
}

// ||p||^2 of an arbitrary coarse operator under the config's objective.
double objective_of(const ExperimentConfig& config, const TimeStepper& phi,
                    const TimeStepper& psi) {
    NlsContext ctx;
    ctx.phi = phi;
    ctx.m = config.m;
    ctx.nt = config.nt;
    ctx.relax = config.relax;
    ctx.pattern_e = pattern_or_zero(psi.explicit_part);
    ctx.pattern_i = support_pattern(psi.implicit_part);
    if (ctx.pattern_i.offsets.empty() || ctx.pattern_i.offsets.front() != 0 ||
        psi.implicit_part.c[0] == 0.0) {
        throw std::invalid_argument("coarse operator needs a nonzero diagonal implicit entry");
    }
    std::vector<double> params(static_cast<size_t>(parameter_count(ctx)), 0.0);
    const double pin = psi.implicit_part.c[0];
    for (int j = 0; j < ctx.pattern_e.nu(); ++j) {
        params[j] = psi.explicit_part.c[ctx.pattern_e.offsets[j]] / pin;
    }
    for (int j = 1; j < ctx.pattern_i.nu(); ++j) {
        params[ctx.pattern_e.nu() + j - 1] = psi.implicit_part.c[ctx.pattern_i.offsets[j]] / pin;
    }
    double s = 0.0;
    for (double pk : nls_objective(params, ctx)) s += pk * pk;
    return s;
}

}  // namespace

CoarseBuild build_coarse(const ExperimentConfig& config, const TimeStepper& phi) {
    CoarseBuild out;
    if (!config.load_operator.empty()) {
        OperatorFile file = read_operator_file(config.load_operator);
        if (file.psi.nx() != config.nx) {
            throw std::invalid_argument("loaded operator size does not match nx");
        }
        out.psi = file.psi;
        out.strategy = "file:" + file.strategy;
        out.objective_initial = file.objective_initial;
        out.objective_final = file.objective_final;
        return out;
    }

    out.strategy = coarse_mode_name(config.coarse);
    switch (config.coarse) {
        case CoarseMode::Redisc: {
            const CirculantStencil L =
                spatial_stencil(config.order, config.a, grid_dx(config.nx), config.nx);
            out.psi = rediscretized_coarse(L, tableau(config.scheme), config.m, grid_dt(config));
            break;
        }
        case CoarseMode::Exact: {
            out.psi.explicit_part = power_column(phi, config.m);
            out.psi.implicit_part = unit_stencil(config.nx);
            out.psi.dt = config.m * phi.dt;
            break;
        }
        case CoarseMode::Trunc: {
            out.psi.explicit_part =
                truncated_coarse(phi, config.m, support_pattern(phi.explicit_part));
            out.psi.implicit_part = unit_stencil(config.nx);
            out.psi.dt = config.m * phi.dt;
            break;
        }
        case CoarseMode::Lls: {
            const WeightVector w =
                power_weights(stepper_spectrum(phi), resolved_weight_p(config));
            out.psi.explicit_part =
                weighted_lls(phi, config.m, support_pattern(phi.explicit_part), w);
            out.psi.implicit_part = unit_stencil(config.nx);
            out.psi.dt = config.m * phi.dt;
            break;
        }
        case CoarseMode::Nls: {
            NlsContext ctx = make_nls_context(config, phi);
            NlsResult res = nls_solve(ctx);
            out.psi = res.psi;
            out.objective_initial = res.objective_initial;
            out.objective_final = res.objective_final;
            out.nls = std::move(res);
            return out;
        }
    }
    const double obj = objective_of(config, phi, out.psi);
    out.objective_initial = obj;
    out.objective_final = obj;
    return out;
}

CellOutcome run_cell(const ExperimentConfig& config) {
    validate(config);
    CellOutcome cell;
    cell.phi = fine_stepper(config);
    cell.coarse = build_coarse(config, cell.phi);
    SolverConfig sc;
    sc.nx = config.nx;
    sc.nt = config.nt;
    sc.m = config.m;
    sc.relax = config.relax;
    sc.tol = config.tol;
    sc.cap = config.cap;
    sc.seed = config.seed;
    MgritRun run = mgrit_solve(sc, cell.phi, cell.coarse.psi, initial_condition(config.nx));
    cell.report = std::move(run.report);
    cell.solution = std::move(run.solution);
    return cell;
}

namespace {

std::string cell_text(const CellOutcome& cell) {
    std::string text =
        cell.report.dnc ? std::string("DNC") : std::to_string(cell.report.iterations);
    if (cell.coarse.nls.has_value() && !cell.coarse.nls->converged) {
        text += "*";  // optimizer budget ran out; best-so-far operator used
    }
    return text;
}

ExperimentConfig table1_config(Scheme scheme, CoarseMode mode, int n, std::uint64_t seed) {
    ExperimentConfig c;
    c.scheme = scheme;
    c.order = scheme == Scheme::Heun2 ? 2 : 3;
    c.cfl = scheme == Scheme::Heun2 ? 0.4 : 1.4;
    c.nx = n;
    c.nt = n;
    c.m = 2;
    c.relax = Relax::FCF;
    c.coarse = mode;
    c.seed = seed;
    return c;
}

ExperimentConfig table2_config(Relax relax, int m, CoarseMode mode, int n, std::uint64_t seed) {
    ExperimentConfig c;
    c.scheme = Scheme::SDIRK3;
    c.order = 3;
    c.cfl = 1.0;
    c.nx = n;
    c.nt = n;
    c.m = m;
    c.relax = relax;
    c.coarse = mode;
    c.seed = seed;
    return c;
}

}  // namespace

std::string replicate_table(int which, int max_exponent, bool dry_run, std::uint64_t seed) {
    if (which != 1 && which != 2) throw std::invalid_argument("table must be 1 or 2");
    if (max_exponent < 6 || max_exponent > 12) {
        throw std::invalid_argument("grid exponent must be between 6 and 12");
    }
    std::ostringstream out;
    out << "# mgritopt-table v1\n";
    std::vector<ExperimentConfig> cols;
    if (which == 1) {
        out << "# explicit schemes, FCF relaxation, m=2; order-2 Heun (CFL 0.4, p=40), "
               "order-3 SSPRK3 (CFL 1.4, p=20)\n";
        out << "grid,wlls_order2,nls_order2,wlls_order3,nls_order3\n";
    } else {
        out << "# implicit SDIRK3 order-3, CFL 1.0; rediscretized vs nonlinear coarse "
               "operators\n";
        out << "grid,F_m2_redisc,F_m2_nls,F_m4_redisc,F_m4_nls,FCF_m2_redisc,FCF_m2_nls,"
               "FCF_m4_redisc,FCF_m4_nls\n";
    }
    for (int e = 6; e <= max_exponent; e += 2) {
        const int n = 1 << e;
        out << "2^" << e;
        std::vector<ExperimentConfig> cells;
        if (which == 1) {
            cells = {table1_config(Scheme::Heun2, CoarseMode::Lls, n, seed),
                     table1_config(Scheme::Heun2, CoarseMode::Nls, n, seed),
                     table1_config(Scheme::SSPRK3, CoarseMode::Lls, n, seed),
                     table1_config(Scheme::SSPRK3, CoarseMode::Nls, n, seed)};
        } else {
            for (Relax relax : {Relax::F, Relax::FCF}) {
                for (int m : {2, 4}) {
                    cells.push_back(table2_config(relax, m, CoarseMode::Redisc, n, seed));
                    cells.push_back(table2_config(relax, m, CoarseMode::Nls, n, seed));
                }
            }
        }
        for (const ExperimentConfig& cfg : cells) {
            if (dry_run) {
                out << ",-";
            } else {
                out << ',' << cell_text(run_cell(cfg));
            }
        }
        out << '\n';
    }
    return out.str();
}

std::string estimate_sweep_csv(const ExperimentConfig& config, bool include_dense) {
    validate(config);
    const TimeStepper phi = fine_stepper(config);
    const CoarseBuild coarse = build_coarse(config, phi);
    const Spectrum lam = stepper_spectrum(phi);
    const Spectrum mu = stepper_spectrum(coarse.psi);
    const int n = config.nx;
    const bool lfa_defined = config.m == 2;
    const bool dense_ok =
        include_dense && static_cast<long>(config.nx) * config.nt <= (1L << 14);

    std::ostringstream out;
    out << "# mgritopt-sweep v1\n";
    out << "# scheme=" << scheme_name(config.scheme) << " order=" << config.order
        << " nx=" << config.nx << " nt=" << config.nt << " m=" << config.m
        << " relax=" << relax_name(config.relax) << " coarse=" << coarse.strategy << "\n";
    out << "k,re_lambda,im_lambda,abs_lambda,re_mu,im_mu,abs_mu,lfa,dobrev";
    if (dense_ok) out << ",dense_block_norm,dense_coarse_norm";
    out << '\n';

    for (int i = 0; i < n; ++i) {
        const int k = -(n / 2) + i;
        const int j = natural_index(k, n);
        const cplx l = lam[j];
        const cplx u = mu[j];
        out << k << ',' << fmt_full(l.real()) << ',' << fmt_full(l.imag()) << ','
            << fmt_full(std::abs(l)) << ',' << fmt_full(u.real()) << ',' << fmt_full(u.imag())
            << ',' << fmt_full(std::abs(u)) << ',';
        if (!lfa_defined) {
            out << "n/a";
        } else if (std::abs(u) >= 1.0) {
            out << "inf";
        } else {
            out << fmt_full(lfa_estimate(l, u, config.relax));
        }
        out << ',';
        if (std::abs(l) >= 1.0 || std::abs(u) >= 1.0) {
            out << "inf";
        } else {
            out << fmt_full(dobrev_bound(l, u, config.m, config.nt, config.relax));
        }
        if (dense_ok) {
            out << ',' << fmt_full(mode_block_norm(l, u, config.m, config.nt, config.relax))
                << ',' << fmt_full(coarse_block_norm(l, u, config.m, config.nt, config.relax));
        }
        out << '\n';
    }

    if (lfa_defined) {
        const EstimatorId id =
            config.relax == Relax::F ? EstimatorId::LfaF : EstimatorId::LfaFCF;
        const WorstCaseReport w = worst_case(lam, mu, id, config.m, config.nt);
        out << "# worst_lfa " << fmt_full(w.max_value) << " at k=" << w.argmax_k << '\n';
    }
    const EstimatorId id =
        config.relax == Relax::F ? EstimatorId::DobrevF : EstimatorId::DobrevFCF;
    const WorstCaseReport w = worst_case(lam, mu, id, config.m, config.nt);
    out << "# worst_dobrev " << fmt_full(w.max_value) << " at k=" << w.argmax_k << '\n';
    return out.str();
}

ExperimentConfig default_config() { return ExperimentConfig{}; }

void apply_override(ExperimentConfig& config, const std::string& key, const std::string& value) {
    if (key == "scheme") {
        config.scheme = scheme_from_name(value);
    } else if (key == "order") {
        config.order = std::stoi(value);
    } else if (key == "nx") {
        config.nx = std::stoi(value);
    } else if (key == "nt") {
        config.nt = std::stoi(value);
    } else if (key == "cfl") {
        config.cfl = std::stod(value);
    } else if (key == "a") {
        config.a = std::stod(value);
    } else if (key == "m") {
        config.m = std::stoi(value);
    } else if (key == "relax") {
        config.relax = relax_from_name(value);
    } else if (key == "coarse") {
        config.coarse = coarse_mode_from_name(value);
    } else if (key == "weight_p") {
        config.weight_p = std::stod(value);
    } else if (key == "tol") {
        config.tol = std::stod(value);
    } else if (key == "cap") {
        config.cap = std::stoi(value);
    } else if (key == "seed") {
        config.seed = std::stoull(value);
    } else if (key == "output") {
        config.output = value;
    } else if (key == "load_operator") {
        config.load_operator = value;
    } else {
        throw std::invalid_argument("unknown config key: " + key);
    }
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    ExperimentConfig config = default_config();
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        // trim
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto last = line.find_last_not_of(" \t\r");
        line = line.substr(first, last - first + 1);
        const size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected key=value");
        }
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        const auto kend = key.find_last_not_of(" \t");
        key = key.substr(0, kend == std::string::npos ? 0 : kend + 1);
        const auto vstart = value.find_first_not_of(" \t");
        value = vstart == std::string::npos ? "" : value.substr(vstart);
        apply_override(config, key, value);
    }
    return config;
}

std::string config_to_text(const ExperimentConfig& config) {
    std::ostringstream out;
    out << "scheme=" << scheme_name(config.scheme) << '\n';
    out << "order=" << config.order << '\n';
    out << "nx=" << config.nx << '\n';
    out << "nt=" << config.nt << '\n';
    out << "cfl=" << fmt_full(config.cfl) << '\n';
    out << "a=" << fmt_full(config.a) << '\n';
    out << "m=" << config.m << '\n';
    out << "relax=" << relax_name(config.relax) << '\n';
    out << "coarse=" << coarse_mode_name(config.coarse) << '\n';
    out << "weight_p=" << fmt_full(config.weight_p) << '\n';
    out << "tol=" << fmt_full(config.tol) << '\n';
    out << "cap=" << config.cap << '\n';
    out << "seed=" << config.seed << '\n';
    out << "output=" << config.output << '\n';
    out << "load_operator=" << config.load_operator << '\n';
    return out.str();
}

std::string history_csv(const ConvergenceReport& report) {
    std::ostringstream out;
    out << "# mgritopt-history v1\n";
    out << "iteration,residual_norm,relative_norm\n";
    const double r0 = report.history.empty() ? 0.0 : report.history.front();
    for (size_t i = 0; i < report.history.size(); ++i) {
        out << i << ',' << fmt_full(report.history[i]) << ','
            << fmt_full(r0 > 0.0 ? report.history[i] / r0 : 0.0) << '\n';
    }
    return out.str();
}

}  // namespace mgritopt
