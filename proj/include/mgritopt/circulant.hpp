#pragma once

#include <vector>

#include "mgritopt/types.hpp"

namespace mgritopt {

// Unnormalized transforms. dft_plus uses the +i kernel (sum_j x_j e^{+i j theta_k}),
// dft_minus the -i kernel; dft_minus(dft_plus(x)) == nx * x. Plans are cached
// per size behind a mutex, so both are safe to call from multiple threads.
std::vector<cplx> dft_plus(const std::vector<cplx>& x);
std::vector<cplx> dft_minus(const std::vector<cplx>& x);

// Eigenvalues lambda_k = sum_d c_d e^{+i d theta_k} in natural transform order.
Spectrum spectrum(const CirculantStencil& c);

// Inverse of spectrum(). Throws if any imaginary residue exceeds imag_tol
// (absolute), which would indicate a convention violation upstream.
CirculantStencil from_spectrum(const Spectrum& s, double imag_tol = 1e-10);

// Circular convolution per the fixed convention. Direct O(nnz * nx) when the
// stencil has at most five nonzeros, spectral otherwise.
std::vector<double> apply(const CirculantStencil& c, const std::vector<double>& u);

// lambda_k = spectrum(Phi_E)_k / spectrum(Phi_I)_k. Throws on a zero implicit
// eigenvalue (singular stepper).
Spectrum stepper_spectrum(const TimeStepper& phi);

// First column of Phi^m, via the inverse transform of lambda_k^m.
CirculantStencil power_column(const TimeStepper& phi, int m);

}  // namespace mgritopt
