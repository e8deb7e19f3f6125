#pragma once

#include <Eigen/Dense>
#include <limits>

#include "mgritopt/types.hpp"

namespace mgritopt {

enum class EstimatorId { LfaF, LfaFCF, DobrevF, DobrevFCF };

std::string estimator_name(EstimatorId id);
EstimatorId estimator_from_name(const std::string& name);

// Closed-form sup over the temporal LFA frequency of the largest singular
// value of the 2x2 block (the paper's m=2 derivation):
//   F:   sqrt(1+|lambda|^2) |lambda^2 - mu| / (1 - |mu|)
//   FCF: |lambda|^2 times the F value.
// Throws on |mu| >= 1 (the estimate is singular there).
double lfa_estimate(cplx lambda, cplx mu, Relax relax);

// Per-mode coarse-block bound:
//   F:   |lambda^m - mu| (1 - |mu|^{nt/m})   / (1 - |mu|)
//   FCF: |lambda|^m |lambda^m - mu| (1 - |mu|^{nt/m - 1}) / (1 - |mu|)
// with the geometric sum replaced by its limit (nt/m, resp. nt/m - 1) when
// |mu| is within 1e-14 of 1. Throws when |lambda| >= 1 or |mu| >= 1.
double dobrev_bound(cplx lambda, cplx mu, int m, int nt, Relax relax);

// Same formula with no precondition checks; used by the optimizer's
// objective, which handles infeasible modes through penalties.
double dobrev_value(cplx lambda, cplx mu, int m, int nt, Relax relax);

struct WorstCaseReport {
    double max_value = 0.0;
    int argmax_k = 0;                 // paper wavenumber; ties go to smaller |k|
    std::vector<int> wavenumbers;     // ascending paper order -nx/2 .. nx/2-1
    std::vector<double> values;       // aligned with wavenumbers; +inf if infeasible
    std::vector<int> infeasible;      // wavenumbers whose preconditions failed
    bool has_infeasible = false;
};

// Per-mode estimates and their maximum. Modes violating the estimator's
// preconditions are reported as +infinity and flagged, never skipped.
WorstCaseReport worst_case(const Spectrum& lambda, const Spectrum& mu, EstimatorId id, int m,
                           int nt);

// Dense per-mode error propagator T_k = [I - P A_c^{-1} R_I A] S over the
// unknowns e^1..e^nt (e^0 = 0 is eliminated). relax is F or FCF.
Eigen::MatrixXcd mode_error_propagator(cplx lambda, cplx mu, int m, int nt, Relax relax);

// Coarse-level (nt/m x nt/m) error propagator: the strictly lower Toeplitz
// block with entries (lambda^m - mu) mu^{i-j-1} (F), post-multiplied by
// lambda^m times the downshift for FCF.
Eigen::MatrixXcd coarse_error_propagator(cplx lambda, cplx mu, int m, int nt, Relax relax);

double mode_block_norm(cplx lambda, cplx mu, int m, int nt, Relax relax);
double coarse_block_norm(cplx lambda, cplx mu, int m, int nt, Relax relax);

// Two-norm of the full space-time iteration matrix, block-diagonalized over
// Fourier modes so only nx dense nt x nt blocks are decomposed. Validation
// oracle; throws when nx*nt exceeds the cap.
double dense_two_level_norm(const TimeStepper& phi, const TimeStepper& psi, int m, int nt, int nx,
                            Relax relax, long cap = 1L << 14);

// Numerical maximization of the 2x2 LFA block's largest singular value over a
// theta grid anchored at arg(mu), where the sup is attained; oracle for tests.
double lfa_grid_max(cplx lambda, cplx mu, Relax relax, int npts = 1024);

}  // namespace mgritopt
