#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mgritopt {

using cplx = std::complex<double>;

// Eigenvalues in natural transform order (index j = 0..nx-1). Public
// reporting maps j to the wavenumber k in [-nx/2, nx/2); see paper_wavenumber.
using Spectrum = std::vector<cplx>;

enum class Scheme { Heun2, SSPRK3, SDIRK3 };
enum class Relax { F, C, FCF };

// First column of a real circulant nx-by-nx operator under the convention
//   (L u)_j = sum_d c[d] * u[(j - d) mod nx],
// so the eigenvalue of Fourier mode k is sum_d c[d] * exp(+i d theta_k).
struct CirculantStencil {
    std::vector<double> c;

    int nx() const { return static_cast<int>(c.size()); }
};

// One-step time integrator in rational circulant form Phi = Phi_I^{-1} Phi_E.
// For explicit schemes the implicit part is exactly the identity column e_0.
struct TimeStepper {
    CirculantStencil implicit_part;
    CirculantStencil explicit_part;
    double dt = 0.0;

    int nx() const { return explicit_part.nx(); }
};

inline CirculantStencil unit_stencil(int nx, int index = 0) {
    CirculantStencil s;
    s.c.assign(nx, 0.0);
    s.c[((index % nx) + nx) % nx] = 1.0;
    return s;
}

// Integer power by repeated multiplication. std::pow(complex, real) routes
// through log and yields NaN at 0^0, which legitimately occurs in the
// Toeplitz closed forms (mu = 0, zeroth power).
inline cplx ipow(cplx base, int e) {
    cplx r = 1.0;
    for (int i = 0; i < e; ++i) r *= base;
    return r;
}

// Natural transform index j -> paper wavenumber k in [-nx/2, nx/2).
inline int paper_wavenumber(int j, int nx) {
    return j < nx / 2 ? j : j - nx;
}

// Paper wavenumber k -> natural transform index.
inline int natural_index(int k, int nx) {
    return ((k % nx) + nx) % nx;
}

inline std::string scheme_name(Scheme s) {
    switch (s) {
        case Scheme::Heun2: return "heun2";
        case Scheme::SSPRK3: return "ssprk3";
        case Scheme::SDIRK3: return "sdirk3";
    }
    throw std::logic_error("unknown scheme");
}

inline Scheme scheme_from_name(const std::string& name) {
    if (name == "heun2") return Scheme::Heun2;
    if (name == "ssprk3") return Scheme::SSPRK3;
    if (name == "sdirk3") return Scheme::SDIRK3;
    throw std::invalid_argument("unknown scheme id: " + name);
}

inline bool is_explicit(Scheme s) {
    return s != Scheme::SDIRK3;
}

inline std::string relax_name(Relax r) {
    switch (r) {
        case Relax::F: return "F";
        case Relax::C: return "C";
        case Relax::FCF: return "FCF";
    }
    throw std::logic_error("unknown relaxation");
}

inline Relax relax_from_name(const std::string& name) {
    if (name == "F" || name == "f") return Relax::F;
    if (name == "C" || name == "c") return Relax::C;
    if (name == "FCF" || name == "fcf") return Relax::FCF;
    throw std::invalid_argument("unknown relaxation kind: " + name);
}

}  // namespace mgritopt
