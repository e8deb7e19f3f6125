#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <string>

#include "mgritopt/circulant.hpp"
#include "mgritopt/discretization.hpp"
#include "mgritopt/estimates.hpp"
#include "mgritopt/experiment.hpp"
#include "mgritopt/opformat.hpp"
#include "mgritopt/optimize.hpp"
#include "mgritopt/solver.hpp"

namespace py = pybind11;
using namespace mgritopt;

namespace {

ExperimentConfig config_from_options(const std::map<std::string, std::string>& options) {
    ExperimentConfig config = default_config();
    for (const auto& [key, value] : options) apply_override(config, key, value);
    return config;
}

py::dict report_dict(const ConvergenceReport& rep) {
    py::dict d;
    d["history"] = rep.history;
    d["iterations"] = rep.iterations;
    d["converged"] = rep.converged;
    d["dnc"] = rep.dnc;
    d["wall_seconds"] = rep.wall_seconds;
    return d;
}

}  // namespace

PYBIND11_MODULE(mgritopt, mod) {
    mod.doc() =
        "Two-level MGRIT/Parareal for 1-D periodic advection: circulant spectra, "
        "convergence estimates, and least-squares coarse operators";

    py::class_<CirculantStencil>(mod, "CirculantStencil")
        .def(py::init<>())
        .def(py::init([](std::vector<double> c) {
            CirculantStencil s;
            s.c = std::move(c);
            return s;
        }))
        .def_readwrite("c", &CirculantStencil::c)
        .def_property_readonly("nx", &CirculantStencil::nx);

    py::class_<TimeStepper>(mod, "TimeStepper")
        .def(py::init<>())
        .def(py::init([](std::vector<double> explicit_part, std::vector<double> implicit_part,
                         double dt) {
            TimeStepper t;
            t.explicit_part.c = std::move(explicit_part);
            t.implicit_part.c = std::move(implicit_part);
            t.dt = dt;
            return t;
        }),
             py::arg("explicit_part"), py::arg("implicit_part"), py::arg("dt"))
        .def_readwrite("explicit_part", &TimeStepper::explicit_part)
        .def_readwrite("implicit_part", &TimeStepper::implicit_part)
        .def_readwrite("dt", &TimeStepper::dt)
        .def_property_readonly("nx", &TimeStepper::nx);

    mod.def("unit_stencil", &unit_stencil, py::arg("nx"), py::arg("index") = 0);

    mod.def(
        "spatial_stencil",
        [](int order, double a, double dx, int nx) { return spatial_stencil(order, a, dx, nx); },
        py::arg("order"), py::arg("a"), py::arg("dx"), py::arg("nx"));

    mod.def(
        "fine_stepper",
        [](const std::string& scheme, int order, int nx, double cfl, double a) {
            ExperimentConfig c = default_config();
            c.scheme = scheme_from_name(scheme);
            c.order = order;
            c.nx = nx;
            c.nt = 2;  // placeholder; only spatial data feeds the stepper
            c.m = 2;
            c.cfl = cfl;
            c.a = a;
            return fine_stepper(c);
        },
        py::arg("scheme"), py::arg("order"), py::arg("nx"), py::arg("cfl"), py::arg("a") = 1.0);

    mod.def(
        "rediscretized",
        [](const std::string& scheme, int order, int nx, double cfl, int m, double a) {
            const double dx = grid_dx(nx);
            const CirculantStencil L = spatial_stencil(order, a, dx, nx);
            return rediscretized_coarse(L, tableau(scheme_from_name(scheme)), m, cfl * dx / a);
        },
        py::arg("scheme"), py::arg("order"), py::arg("nx"), py::arg("cfl"), py::arg("m"),
        py::arg("a") = 1.0);

    mod.def("spectrum", [](const CirculantStencil& c) { return spectrum(c); }, py::arg("column"));
    mod.def("stepper_spectrum", &stepper_spectrum, py::arg("stepper"));
    mod.def("power_column", &power_column, py::arg("stepper"), py::arg("m"));

    mod.def(
        "lfa_estimate",
        [](cplx lam, cplx mu, const std::string& relax) {
            return lfa_estimate(lam, mu, relax_from_name(relax));
        },
        py::arg("lam"), py::arg("mu"), py::arg("relax"));
    mod.def(
        "dobrev_bound",
        [](cplx lam, cplx mu, int m, int nt, const std::string& relax) {
            return dobrev_bound(lam, mu, m, nt, relax_from_name(relax));
        },
        py::arg("lam"), py::arg("mu"), py::arg("m"), py::arg("nt"), py::arg("relax"));
    mod.def(
        "worst_case",
        [](const Spectrum& lam, const Spectrum& mu, const std::string& estimator, int m, int nt) {
            const WorstCaseReport rep = worst_case(lam, mu, estimator_from_name(estimator), m, nt);
            py::dict d;
            d["max_value"] = rep.max_value;
            d["argmax_k"] = rep.argmax_k;
            d["wavenumbers"] = rep.wavenumbers;
            d["values"] = rep.values;
            d["infeasible"] = rep.infeasible;
            d["has_infeasible"] = rep.has_infeasible;
            return d;
        },
        py::arg("lam"), py::arg("mu"), py::arg("estimator"), py::arg("m"), py::arg("nt"));

    mod.def(
        "truncated_coarse",
        [](const TimeStepper& phi, int m, const std::vector<int>& offsets) {
            return truncated_coarse(phi, m, make_pattern(offsets, phi.nx()));
        },
        py::arg("phi"), py::arg("m"), py::arg("offsets"));
    mod.def(
        "weighted_lls",
        [](const TimeStepper& phi, int m, const std::vector<int>& offsets,
           const std::vector<double>& weights) {
            WeightVector w;
            w.w = weights;
            w.descriptor = "custom";
            return weighted_lls(phi, m, make_pattern(offsets, phi.nx()), w);
        },
        py::arg("phi"), py::arg("m"), py::arg("offsets"), py::arg("weights"));

    mod.def("sequential_solve", &sequential_solve, py::arg("phi"), py::arg("g"), py::arg("nt"));

    mod.def(
        "mgrit_solve",
        [](const TimeStepper& phi, const TimeStepper& psi, const std::vector<double>& g, int nt,
           int m, const std::string& relax, double tol, int cap, std::uint64_t seed) {
            SolverConfig sc;
            sc.nx = phi.nx();
            sc.nt = nt;
            sc.m = m;
            sc.relax = relax_from_name(relax);
            sc.tol = tol;
            sc.cap = cap;
            sc.seed = seed;
            MgritRun run = mgrit_solve(sc, phi, psi, g);
            py::dict d = report_dict(run.report);
            d["solution"] = run.solution;
            return d;
        },
        py::arg("phi"), py::arg("psi"), py::arg("g"), py::arg("nt"), py::arg("m"),
        py::arg("relax") = "FCF", py::arg("tol") = 1e-10, py::arg("cap") = 50,
        py::arg("seed") = 0);

    mod.def(
        "run_experiment",
        [](const std::map<std::string, std::string>& options) {
            const ExperimentConfig config = config_from_options(options);
            const CellOutcome cell = run_cell(config);
            py::dict d = report_dict(cell.report);
            d["strategy"] = cell.coarse.strategy;
            d["objective_initial"] = cell.coarse.objective_initial;
            d["objective_final"] = cell.coarse.objective_final;
            if (cell.coarse.nls.has_value()) {
                d["nls_stop"] = nls_stop_name(cell.coarse.nls->reason);
                d["nls_evaluations"] = cell.coarse.nls->evaluations;
                d["nls_converged"] = cell.coarse.nls->converged;
            }
            return d;
        },
        py::arg("options"));

    mod.def(
        "optimize_operator",
        [](const std::map<std::string, std::string>& options, const std::string& path) {
            const ExperimentConfig config = config_from_options(options);
            validate(config);
            const TimeStepper phi = fine_stepper(config);
            const CoarseBuild build = build_coarse(config, phi);
            OperatorFile file;
            file.scheme = config.scheme;
            file.order = config.order;
            file.m = config.m;
            file.relax = config.relax;
            file.strategy = build.strategy;
            file.objective_initial = build.objective_initial;
            file.objective_final = build.objective_final;
            file.psi = build.psi;
            write_operator_file(path, file);
            py::dict d;
            d["strategy"] = build.strategy;
            d["objective_initial"] = build.objective_initial;
            d["objective_final"] = build.objective_final;
            d["converged"] = !build.nls.has_value() || build.nls->converged;
            return d;
        },
        py::arg("options"), py::arg("path"));

    mod.def("estimate_sweep_csv", [](const std::map<std::string, std::string>& options,
                                     bool dense) {
        return estimate_sweep_csv(config_from_options(options), dense);
    }, py::arg("options"), py::arg("dense") = false);

    mod.def("replicate_table", &replicate_table, py::arg("which"), py::arg("max_exponent"),
            py::arg("dry_run") = false, py::arg("seed") = 0);
}
