#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mgritopt/circulant.hpp"
#include "mgritopt/experiment.hpp"
#include "mgritopt/opformat.hpp"

using namespace mgritopt;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) : path(name) {}
    ~TempFile() { std::remove(path.c_str()); }
};

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) lines.push_back(line);
    return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::istringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
}

ExperimentConfig table2_like(int n, int m, Relax relax, CoarseMode mode) {
    ExperimentConfig c;
    c.scheme = Scheme::SDIRK3;
    c.order = 3;
    c.cfl = 1.0;
    c.nx = n;
    c.nt = n;
    c.m = m;
    c.relax = relax;
    c.coarse = mode;
    return c;
}

}  // namespace

TEST_CASE("validate rejects malformed configurations") {
    ExperimentConfig c = default_config();
    CHECK_NOTHROW(validate(c));

    ExperimentConfig bad = c;
    bad.order = 4;
    CHECK_THROWS(validate(bad));
    bad = c;
    bad.nx = 4;
    CHECK_THROWS(validate(bad));
    bad = c;
    bad.m = 1;
    CHECK_THROWS(validate(bad));
    bad = c;
    bad.nt = 63;  // not a multiple of m = 2
    CHECK_THROWS(validate(bad));
    bad = c;
    bad.relax = Relax::C;
    CHECK_THROWS(validate(bad));
    bad = c;
    bad.coarse = CoarseMode::Trunc;  // sparse explicit build, implicit scheme
    CHECK_THROWS(validate(bad));
    bad = c;
    bad.coarse = CoarseMode::Lls;
    CHECK_THROWS(validate(bad));
    bad = c;
    bad.cap = 0;
    CHECK_THROWS(validate(bad));
    bad = c;
    bad.cfl = 0.0;
    CHECK_THROWS(validate(bad));
    bad = c;
    bad.tol = 0.0;
    CHECK_THROWS(validate(bad));

    bad = c;
    bad.scheme = Scheme::Heun2;
    bad.order = 2;
    bad.coarse = CoarseMode::Trunc;
    CHECK_NOTHROW(validate(bad));
}

TEST_CASE("the weight exponent defaults by order and accepts overrides") {
    ExperimentConfig c = default_config();
    c.scheme = Scheme::Heun2;
    c.order = 2;
    CHECK(resolved_weight_p(c) == 40.0);
    c.scheme = Scheme::SSPRK3;
    c.order = 3;
    CHECK(resolved_weight_p(c) == 20.0);
    c.weight_p = 7.0;
    CHECK(resolved_weight_p(c) == 7.0);
}

TEST_CASE("config text round-trips through a file") {
    ExperimentConfig c = default_config();
    c.scheme = Scheme::SSPRK3;
    c.order = 3;
    c.nx = 128;
    c.nt = 256;
    c.cfl = 1.4;
    c.a = 2.0;
    c.m = 4;
    c.relax = Relax::FCF;
    c.coarse = CoarseMode::Nls;
    c.weight_p = 12.5;
    c.tol = 1e-9;
    c.cap = 33;
    c.seed = 99;

    TempFile tmp("experiment_roundtrip.cfg");
    std::ofstream(tmp.path) << config_to_text(c) << "# trailing comment\n";
    const ExperimentConfig back = load_config_file(tmp.path);
    CHECK(back.scheme == c.scheme);
    CHECK(back.order == c.order);
    CHECK(back.nx == c.nx);
    CHECK(back.nt == c.nt);
    CHECK(back.cfl == c.cfl);
    CHECK(back.a == c.a);
    CHECK(back.m == c.m);
    CHECK(back.relax == c.relax);
    CHECK(back.coarse == c.coarse);
    CHECK(back.weight_p == c.weight_p);
    CHECK(back.tol == c.tol);
    CHECK(back.cap == c.cap);
    CHECK(back.seed == c.seed);
}

TEST_CASE("overrides cover every key and reject unknown ones") {
    ExperimentConfig c = default_config();
    apply_override(c, "scheme", "heun2");
    apply_override(c, "order", "2");
    apply_override(c, "nx", "32");
    apply_override(c, "nt", "64");
    apply_override(c, "cfl", "0.4");
    apply_override(c, "a", "1.5");
    apply_override(c, "m", "4");
    apply_override(c, "relax", "FCF");
    apply_override(c, "coarse", "lls");
    apply_override(c, "weight_p", "40");
    apply_override(c, "tol", "1e-8");
    apply_override(c, "cap", "25");
    apply_override(c, "seed", "3");
    apply_override(c, "output", "out.csv");
    apply_override(c, "load_operator", "psi.op");
    CHECK(c.scheme == Scheme::Heun2);
    CHECK(c.order == 2);
    CHECK(c.nx == 32);
    CHECK(c.nt == 64);
    CHECK(c.cfl == 0.4);
    CHECK(c.a == 1.5);
    CHECK(c.m == 4);
    CHECK(c.relax == Relax::FCF);
    CHECK(c.coarse == CoarseMode::Lls);
    CHECK(c.weight_p == 40.0);
    CHECK(c.tol == 1e-8);
    CHECK(c.cap == 25);
    CHECK(c.seed == 3);
    CHECK(c.output == "out.csv");
    CHECK(c.load_operator == "psi.op");
    CHECK_THROWS(apply_override(c, "NX", "16"));
    CHECK_THROWS(apply_override(c, "grid", "64"));
}

TEST_CASE("coarse mode names round-trip") {
    for (CoarseMode mode : {CoarseMode::Redisc, CoarseMode::Trunc, CoarseMode::Lls,
                            CoarseMode::Nls, CoarseMode::Exact}) {
        CHECK(coarse_mode_from_name(coarse_mode_name(mode)) == mode);
    }
    CHECK_THROWS(coarse_mode_from_name("spectral"));
}

TEST_CASE("the exact coarse operator converges in at most two cycles") {
    ExperimentConfig c = table2_like(64, 2, Relax::FCF, CoarseMode::Exact);
    const CellOutcome cell = run_cell(c);
    CHECK(cell.report.converged);
    CHECK(cell.report.iterations <= 2);
}

TEST_CASE("the rediscretized F m=2 cell lands in the published window") {
    ExperimentConfig c = table2_like(64, 2, Relax::FCF, CoarseMode::Redisc);
    const CellOutcome cell = run_cell(c);
    CHECK(cell.report.converged);
    CHECK(cell.report.iterations >= 11);
    CHECK(cell.report.iterations <= 17);
    CHECK(cell.coarse.strategy == "redisc");
    CHECK(cell.coarse.objective_initial == cell.coarse.objective_final);
}

TEST_CASE("a saved operator reproduces the in-process run exactly") {
    ExperimentConfig c = table2_like(64, 2, Relax::F, CoarseMode::Nls);
    const CellOutcome direct = run_cell(c);
    REQUIRE(direct.coarse.nls.has_value());

    OperatorFile file;
    file.scheme = c.scheme;
    file.order = c.order;
    file.m = c.m;
    file.relax = c.relax;
    file.strategy = direct.coarse.strategy;
    file.objective_initial = direct.coarse.objective_initial;
    file.objective_final = direct.coarse.objective_final;
    file.psi = direct.coarse.psi;
    TempFile tmp("experiment_saved.op");
    write_operator_file(tmp.path, file);

    ExperimentConfig loaded_cfg = c;
    loaded_cfg.coarse = CoarseMode::Redisc;  // must be ignored by the loader path
    loaded_cfg.load_operator = tmp.path;
    const CellOutcome loaded = run_cell(loaded_cfg);

    CHECK(loaded.coarse.strategy == "file:nls");
    const Spectrum a = stepper_spectrum(direct.coarse.psi);
    const Spectrum b = stepper_spectrum(loaded.coarse.psi);
    for (int k = 0; k < c.nx; ++k) CHECK(a[k] == b[k]);
    CHECK(loaded.report.iterations == direct.report.iterations);
    REQUIRE(loaded.report.history.size() == direct.report.history.size());
    for (size_t i = 0; i < loaded.report.history.size(); ++i) {
        CHECK(loaded.report.history[i] == direct.report.history[i]);
    }
}

TEST_CASE("table 1 has the documented shape and is deterministic") {
    const std::string text = replicate_table(1, 6, false, 0);
    const auto lines = split_lines(text);
    REQUIRE(lines.size() >= 4);
    CHECK(lines[0] == "# mgritopt-table v1");
    CHECK(lines[2] == "grid,wlls_order2,nls_order2,wlls_order3,nls_order3");
    const auto cells = split_csv(lines[3]);
    REQUIRE(cells.size() == 5);
    CHECK(cells[0] == "2^6");
    for (size_t i = 1; i < cells.size(); ++i) {
        const int iters = std::stoi(cells[i]);
        CHECK(iters >= 1);
        CHECK(iters <= 50);
    }
    CHECK(replicate_table(1, 6, false, 0) == text);
}

TEST_CASE("a dry run emits the full ladder without solving") {
    const std::string text = replicate_table(2, 12, true, 0);
    const auto lines = split_lines(text);
    REQUIRE(lines.size() == 7);  // magic, comment, header, rows 2^6..2^12
    CHECK(lines[2].substr(0, 5) == "grid,");
    const std::vector<std::string> grids = {"2^6", "2^8", "2^10", "2^12"};
    for (size_t r = 0; r < grids.size(); ++r) {
        const auto cells = split_csv(lines[3 + r]);
        REQUIRE(cells.size() == 9);
        CHECK(cells[0] == grids[r]);
        for (size_t i = 1; i < cells.size(); ++i) CHECK(cells[i] == "-");
    }
}

TEST_CASE("the table harness rejects out-of-range requests") {
    CHECK_THROWS(replicate_table(3, 6, true, 0));
    CHECK_THROWS(replicate_table(1, 5, true, 0));
    CHECK_THROWS(replicate_table(1, 13, true, 0));
}

TEST_CASE("the estimate sweep flags only the consistency mode for an exact coarse operator") {
    ExperimentConfig c = table2_like(32, 2, Relax::F, CoarseMode::Exact);
    const std::string text = estimate_sweep_csv(c, false);
    const auto lines = split_lines(text);
    CHECK(lines[0] == "# mgritopt-sweep v1");
    CHECK(lines[2] ==
          "k,re_lambda,im_lambda,abs_lambda,re_mu,im_mu,abs_mu,lfa,dobrev");
    int rows = 0;
    for (size_t i = 3; i < lines.size(); ++i) {
        if (lines[i].empty() || lines[i][0] == '#') continue;
        const auto cells = split_csv(lines[i]);
        REQUIRE(cells.size() == 9);
        ++rows;
        if (cells[0] == "0") {
            CHECK(cells[7] == "inf");  // lambda_0 = mu_0 = 1
            CHECK(cells[8] == "inf");
        } else {
            CHECK(std::stod(cells[7]) <= 1e-8);
            CHECK(std::stod(cells[8]) <= 1e-10);
        }
    }
    CHECK(rows == 32);
}

TEST_CASE("the estimate sweep reports an unstable rediscretized operator as infeasible") {
    ExperimentConfig c = default_config();
    c.scheme = Scheme::SSPRK3;
    c.order = 3;
    c.cfl = 1.4;
    c.nx = 32;
    c.nt = 32;
    c.m = 2;
    c.relax = Relax::FCF;
    c.coarse = CoarseMode::Redisc;
    const std::string text = estimate_sweep_csv(c, false);
    bool saw_infeasible = false;
    for (const std::string& line : split_lines(text)) {
        if (line.empty() || line[0] == '#' || line[0] == 'k') continue;
        const auto cells = split_csv(line);
        if (cells.size() == 9 && cells[7] == "inf" && cells[0] != "0") saw_infeasible = true;
    }
    CHECK(saw_infeasible);
}

TEST_CASE("dense sweep columns are dominated by the Dobrev bound") {
    ExperimentConfig c = table2_like(32, 2, Relax::F, CoarseMode::Redisc);
    const std::string text = estimate_sweep_csv(c, true);
    const auto lines = split_lines(text);
    CHECK(lines[2] ==
          "k,re_lambda,im_lambda,abs_lambda,re_mu,im_mu,abs_mu,lfa,dobrev,"
          "dense_block_norm,dense_coarse_norm");
    int feasible = 0;
    for (size_t i = 3; i < lines.size(); ++i) {
        if (lines[i].empty() || lines[i][0] == '#') continue;
        const auto cells = split_csv(lines[i]);
        REQUIRE(cells.size() == 11);
        if (cells[8] == "inf") continue;
        const double dobrev = std::stod(cells[8]);
        const double dense_coarse = std::stod(cells[10]);
        CHECK(dobrev >= dense_coarse * (1.0 - 1e-8));
        ++feasible;
    }
    CHECK(feasible == 31);  // every mode except k = 0
}

TEST_CASE("history CSV carries one row per recorded residual") {
    ExperimentConfig c = table2_like(32, 2, Relax::FCF, CoarseMode::Exact);
    const CellOutcome cell = run_cell(c);
    const std::string text = history_csv(cell.report);
    const auto lines = split_lines(text);
    REQUIRE(lines.size() == cell.report.history.size() + 2);
    CHECK(lines[0] == "# mgritopt-history v1");
    CHECK(lines[1] == "iteration,residual_norm,relative_norm");
    const auto first = split_csv(lines[2]);
    REQUIRE(first.size() == 3);
    CHECK(first[0] == "0");
    CHECK(std::stod(first[2]) == 1.0);
    const auto last = split_csv(lines.back());
    CHECK(std::stod(last[2]) <= c.tol);
}
