#pragma once

#include <Eigen/Dense>

#include "mgritopt/types.hpp"

namespace mgritopt {

// Diagonal of the SDIRK3 stage matrix: the root of 6z^3 - 18z^2 + 9z - 1
// in (1/3, 1/2), giving an L-stable 3rd-order method.
inline constexpr double kSdirkZeta = 0.4358665215084590;

struct ButcherTableau {
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    Eigen::VectorXd c;
    Scheme id;
};

ButcherTableau tableau(Scheme id);

// First column of the circulant discrete d/dx(a u) operator.
// order 2: (a/(2dx)) [3 u_j - 4 u_{j-1} + u_{j-2}]
// order 3: (a/(6dx)) [u_{j-2} - 6 u_{j-1} + 3 u_j + 2 u_{j+1}]
CirculantStencil spatial_stencil(int order, double a, double dx, int nx);

// Stability function R(z) = 1 + z b^T (I - zA)^{-1} 1, evaluated stagewise.
cplx stability_function(const ButcherTableau& tab, cplx z);

// Assembles Phi_E = P(Z) e_0 and Phi_I = Q(Z) e_0 with Z = -dt L, where
// R = P/Q is the scheme's stability function. Polynomials are evaluated on
// the spectrum of Z and transformed back (exact for circulants). The
// hard-coded P, Q coefficients are cross-checked per mode against the
// stagewise stability function.
TimeStepper build_time_stepper(const CirculantStencil& L, const ButcherTableau& tab, double dt);

// Same scheme and spatial operator, step m*dt.
TimeStepper rediscretized_coarse(const CirculantStencil& L, const ButcherTableau& tab, int m,
                                 double dt);

}  // namespace mgritopt
