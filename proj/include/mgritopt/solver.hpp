#pragma once

#include <cstdint>
#include <vector>

#include "mgritopt/types.hpp"

namespace mgritopt {

struct SolverConfig {
    int nx = 0;
    int nt = 0;
    int m = 2;
    Relax relax = Relax::FCF;
    double tol = 1e-10;   // stop when ||r_it|| / ||r_0|| <= tol
    int cap = 50;         // iteration cap; hitting it sets the DNC flag
    std::uint64_t seed = 0;
};

struct ConvergenceReport {
    std::vector<double> history;  // absolute residual two-norms, length iterations+1
    int iterations = 0;           // completed cycles
    bool converged = false;
    bool dnc = false;             // hit the cap without reaching the tolerance
    double wall_seconds = 0.0;
};

// Forward substitution u^{n+1} = Phi u^n; rows 0..nt.
std::vector<std::vector<double>> sequential_solve(const TimeStepper& phi,
                                                  const std::vector<double>& g, int nt);

// Space-time iterate plus the operators driving it. u^0 holds the initial
// condition and is never modified by relaxation or correction.
struct SpaceTimeState {
    TimeStepper phi;
    TimeStepper psi;
    Spectrum lam;  // stepper_spectrum(phi)
    Spectrum mu;   // stepper_spectrum(psi)
    int m = 2;
    Relax relax = Relax::FCF;
    std::vector<std::vector<double>> u;  // nt+1 rows of nx values

    int nx() const { return phi.nx(); }
    int nt() const { return static_cast<int>(u.size()) - 1; }
};

// State with u^0 = g and zeros elsewhere; tests overwrite u as needed.
SpaceTimeState make_state(const TimeStepper& phi, const TimeStepper& psi, int m, Relax relax,
                          const std::vector<double>& g, int nt);

// One application of the fine (resp. coarse) stepper, spectrally exact.
std::vector<double> step_fine(const SpaceTimeState& s, const std::vector<double>& u);
std::vector<double> step_coarse(const SpaceTimeState& s, const std::vector<double>& e);

// r^0 = 0, r^n = Phi u^{n-1} - u^n.
std::vector<std::vector<double>> residual(const SpaceTimeState& s);

// Euclidean norm of the full space-time residual, fixed summation order.
double residual_norm(const SpaceTimeState& s);

// F: re-steps each C-point's following F-interval; C: re-steps each C-point
// (except t=0) from the preceding F-point; FCF: F then C then F.
void relax(SpaceTimeState& s, Relax kind);

// Injected C-point residuals drive the coarse error recurrence
// e^{n+1} = Psi e^n + r^{n+1} with e^0 = 0; errors are added at C-points and
// one F-relaxation completes the ideal interpolation.
void coarse_grid_correction(SpaceTimeState& s);

struct MgritRun {
    ConvergenceReport report;
    std::vector<std::vector<double>> solution;
};

// Full cycle iteration from the paper's protocol: u^0 = g, u^{n>0} filled with
// seeded Uniform(0,1) draws; each iteration is relax(kind) followed by the
// coarse-grid correction; history records the residual norm after
// initialization and after every iteration.
MgritRun mgrit_solve(const SolverConfig& config, const TimeStepper& phi, const TimeStepper& psi,
                     const std::vector<double>& g);

}  // namespace mgritopt
