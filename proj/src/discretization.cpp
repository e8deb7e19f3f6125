#include "mgritopt/discretization.hpp"

#include <cmath>

#include "mgritopt/circulant.hpp"

namespace mgritopt {

ButcherTableau tableau(Scheme id) {
    ButcherTableau t;
    t.id = id;
    switch (id) {
        case Scheme::Heun2: {
            t.A = Eigen::MatrixXd::Zero(2, 2);
            t.A(1, 0) = 1.0;
            t.b = Eigen::VectorXd(2);
            t.b << 0.5, 0.5;
            break;
        }
        case Scheme::SSPRK3: {
            t.A = Eigen::MatrixXd::Zero(3, 3);
            t.A(1, 0) = 1.0;
            t.A(2, 0) = 0.25;
            t.A(2, 1) = 0.25;
            t.b = Eigen::VectorXd(3);
            t.b << 1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0;
            break;
        }
        case Scheme::SDIRK3: {
            const double z = kSdirkZeta;
            const double alpha = (1.0 + z) / 2.0;
            const double beta = (1.0 - z) / 2.0;
            const double gamma = -1.5 * z * z + 4.0 * z - 0.25;
            const double eps = 1.5 * z * z - 5.0 * z + 1.25;
            t.A = Eigen::MatrixXd::Zero(3, 3);
            t.A(0, 0) = z;
            t.A(1, 0) = beta;
            t.A(1, 1) = z;
            t.A(2, 0) = gamma;
            t.A(2, 1) = eps;
            t.A(2, 2) = z;
            t.b = Eigen::VectorXd(3);
            t.b << gamma, eps, z;
            (void)alpha;
            break;
        }
    }
    t.c = t.A.rowwise().sum();
    return t;
}

CirculantStencil spatial_stencil(int order, double a, double dx, int nx) {
    if (nx < 5) throw std::invalid_argument("spatial_stencil: nx too small for stencil width");
    if (dx <= 0.0) throw std::invalid_argument("spatial_stencil: dx must be positive");
    CirculantStencil s;
    s.c.assign(static_cast<size_t>(nx), 0.0);
    if (order == 2) {
        const double f = a / (2.0 * dx);
        s.c[0] = 3.0 * f;
        s.c[1] = -4.0 * f;
        s.c[2] = 1.0 * f;
    } else if (order == 3) {
        const double f = a / (6.0 * dx);
        s.c[0] = 3.0 * f;
        s.c[1] = -6.0 * f;
        s.c[2] = 1.0 * f;
        s.c[static_cast<size_t>(nx) - 1] = 2.0 * f;  // offset -1 wraps
    } else {
        throw std::invalid_argument("spatial_stencil: order must be 2 or 3");
    }
    return s;
}

cplx stability_function(const ButcherTableau& tab, cplx z) {
    const int s = static_cast<int>(tab.b.size());
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Identity(s, s) - z * tab.A.cast<cplx>();
    Eigen::VectorXcd ones = Eigen::VectorXcd::Ones(s);
    Eigen::VectorXcd k = M.partialPivLu().solve(ones);
    return 1.0 + z * (tab.b.cast<cplx>().array() * k.array()).sum();
}

namespace {

// Numerator/denominator coefficients of R(z) = P(z)/Q(z), ascending powers.
// SDIRK3: Q = (1 - zeta z)^3; P derived by expanding Q(z) R(z), whose cubic
// term vanishes by L-stability (R(inf) = 0).
void stability_polynomials(Scheme id, std::vector<double>& p, std::vector<double>& q) {
    switch (id) {
        case Scheme::Heun2:
            p = {1.0, 1.0, 0.5};
            q = {1.0};
            return;
        case Scheme::SSPRK3:
            p = {1.0, 1.0, 0.5, 1.0 / 6.0};
            q = {1.0};
            return;
        case Scheme::SDIRK3: {
            const double z = kSdirkZeta;
            p = {1.0, 1.0 - 3.0 * z, 0.5 - 3.0 * z + 3.0 * z * z};
            q = {1.0, -3.0 * z, 3.0 * z * z, -z * z * z};
            return;
        }
    }
    throw std::logic_error("unknown scheme");
}

cplx polyval(const std::vector<double>& coeffs, cplx z) {
    cplx acc(0.0, 0.0);
    for (size_t i = coeffs.size(); i-- > 0;) acc = acc * z + coeffs[i];
    return acc;
}

}  // namespace

TimeStepper build_time_stepper(const CirculantStencil& L, const ButcherTableau& tab, double dt) {
    if (dt < 0.0) throw std::invalid_argument("build_time_stepper: dt must be nonnegative");
    std::vector<double> p, q;
    stability_polynomials(tab.id, p, q);

    Spectrum ell = spectrum(L);
    const int n = static_cast<int>(ell.size());
    Spectrum pe(ell.size()), qi(ell.size());
    for (int k = 0; k < n; ++k) {
        const cplx z = -dt * ell[k];
        pe[k] = polyval(p, z);
        qi[k] = polyval(q, z);
        // Guard against a transcription slip in the hard-coded coefficients.
        const cplx r_poly = pe[k] / qi[k];
        const cplx r_stage = stability_function(tab, z);
        if (std::abs(r_poly - r_stage) > 1e-11 * std::max(1.0, std::abs(r_stage)))
            throw std::logic_error("build_time_stepper: P/Q disagrees with stagewise stability function");
    }

    TimeStepper phi;
    phi.dt = dt;
    phi.explicit_part = from_spectrum(pe);
    if (is_explicit(tab.id))
        phi.implicit_part = unit_stencil(n);
    else
        phi.implicit_part = from_spectrum(qi);
    return phi;
}

TimeStepper rediscretized_coarse(const CirculantStencil& L, const ButcherTableau& tab, int m,
                                 double dt) {
    if (m < 1) throw std::invalid_argument("rediscretized_coarse: m must be >= 1");
    return build_time_stepper(L, tab, m * dt);
}

}  // namespace mgritopt
