#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "mgritopt/circulant.hpp"
#include "mgritopt/discretization.hpp"

using namespace mgritopt;

namespace {

double max_abs_spectrum(const TimeStepper& phi) {
    double worst = 0.0;
    for (const cplx& v : stepper_spectrum(phi)) worst = std::max(worst, std::abs(v));
    return worst;
}

TimeStepper cfl_stepper(Scheme scheme, int order, double cfl, int nx) {
    const double dx = 2.0 / nx;
    return build_time_stepper(spatial_stencil(order, 1.0, dx, nx), tableau(scheme), cfl * dx);
}

}  // namespace

TEST_CASE("order-2 stencil matches the upwind formula") {
    const CirculantStencil c = spatial_stencil(2, 1.0, 1.0, 8);
    CHECK(c.c[0] == doctest::Approx(1.5));
    CHECK(c.c[1] == doctest::Approx(-2.0));
    CHECK(c.c[2] == doctest::Approx(0.5));
    for (int j = 3; j < 8; ++j) CHECK(c.c[j] == 0.0);
}

TEST_CASE("order-3 stencil matches the upwind-biased formula") {
    const CirculantStencil c = spatial_stencil(3, 1.0, 1.0, 8);
    CHECK(c.c[0] == doctest::Approx(0.5));
    CHECK(c.c[1] == doctest::Approx(-1.0));
    CHECK(c.c[2] == doctest::Approx(1.0 / 6.0));
    CHECK(c.c[7] == doctest::Approx(1.0 / 3.0));
    for (int j = 3; j < 7; ++j) CHECK(c.c[j] == 0.0);
}

TEST_CASE("zero wavespeed gives the zero operator") {
    const CirculantStencil c = spatial_stencil(2, 0.0, 1.0, 8);
    for (double v : c.c) CHECK(v == 0.0);
}

TEST_CASE("stencils reject grids too small for their width") {
    CHECK_THROWS(spatial_stencil(2, 1.0, 1.0, 4));
    CHECK_THROWS(spatial_stencil(3, 1.0, 1.0, 4));
}

TEST_CASE("stencil rows sum to zero") {
    for (int order : {2, 3}) {
        const CirculantStencil c = spatial_stencil(order, 1.7, 0.03, 32);
        double sum = 0.0;
        for (double v : c.c) sum += v;
        CHECK(std::abs(sum) <= 1e-14 * 1.7 / 0.03);
    }
}

TEST_CASE("Heun2 tableau") {
    const ButcherTableau tab = tableau(Scheme::Heun2);
    CHECK(tab.A(0, 0) == 0.0);
    CHECK(tab.A(0, 1) == 0.0);
    CHECK(tab.A(1, 0) == 1.0);
    CHECK(tab.A(1, 1) == 0.0);
    CHECK(tab.b(0) == doctest::Approx(0.5));
    CHECK(tab.b(1) == doctest::Approx(0.5));
}

TEST_CASE("SSPRK3 tableau") {
    const ButcherTableau tab = tableau(Scheme::SSPRK3);
    CHECK(tab.A(1, 0) == doctest::Approx(1.0));
    CHECK(tab.A(2, 0) == doctest::Approx(0.25));
    CHECK(tab.A(2, 1) == doctest::Approx(0.25));
    CHECK(tab.b(0) == doctest::Approx(1.0 / 6.0));
    CHECK(tab.b(1) == doctest::Approx(1.0 / 6.0));
    CHECK(tab.b(2) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("SDIRK3 tableau diagonal and derived coefficients") {
    const ButcherTableau tab = tableau(Scheme::SDIRK3);
    for (int i = 0; i < 3; ++i) {
        CHECK(tab.A(i, i) == doctest::Approx(kSdirkZeta).epsilon(1e-15));
    }
    // zeta is the root of 6 z^3 - 18 z^2 + 9 z - 1 in (1/3, 1/2).
    const double z = kSdirkZeta;
    CHECK(std::abs(6 * z * z * z - 18 * z * z + 9 * z - 1) <= 1e-13);
}

TEST_CASE("tableau row sums equal the nodes and weights sum to one") {
    for (Scheme id : {Scheme::Heun2, Scheme::SSPRK3, Scheme::SDIRK3}) {
        const ButcherTableau tab = tableau(id);
        for (int i = 0; i < tab.A.rows(); ++i) {
            CHECK(std::abs(tab.A.row(i).sum() - tab.c(i)) <= 1e-14);
        }
        CHECK(std::abs(tab.b.sum() - 1.0) <= 1e-14);
    }
}

TEST_CASE("zero time step yields the identity stepper") {
    const CirculantStencil L = spatial_stencil(2, 1.0, 0.25, 8);
    for (Scheme id : {Scheme::Heun2, Scheme::SSPRK3, Scheme::SDIRK3}) {
        const TimeStepper phi = build_time_stepper(L, tableau(id), 0.0);
        for (int j = 0; j < 8; ++j) {
            CHECK(phi.explicit_part.c[j] == doctest::Approx(j == 0 ? 1.0 : 0.0).epsilon(1e-14));
            CHECK(phi.implicit_part.c[j] == doctest::Approx(j == 0 ? 1.0 : 0.0).epsilon(1e-14));
        }
    }
}

TEST_CASE("stepper spectra equal the scalar stability function per mode") {
    const int n = 32;
    const double dx = 2.0 / n;
    for (auto [id, order, cfl] : {std::tuple{Scheme::Heun2, 2, 0.4},
                                  std::tuple{Scheme::SSPRK3, 3, 1.4},
                                  std::tuple{Scheme::SDIRK3, 3, 1.0}}) {
        const CirculantStencil L = spatial_stencil(order, 1.0, dx, n);
        const ButcherTableau tab = tableau(id);
        const double dt = cfl * dx;
        const Spectrum lam = stepper_spectrum(build_time_stepper(L, tab, dt));
        const Spectrum ell = spectrum(L);
        for (int k = 0; k < n; ++k) {
            const cplx want = stability_function(tab, -dt * ell[k]);
            CHECK(std::abs(lam[k] - want) <= 1e-12 * std::max(1.0, std::abs(want)));
        }
    }
}

TEST_CASE("explicit schemes have identity implicit parts") {
    const TimeStepper phi = cfl_stepper(Scheme::Heun2, 2, 0.4, 16);
    for (int j = 0; j < 16; ++j) {
        CHECK(phi.implicit_part.c[j] == (j == 0 ? 1.0 : 0.0));
    }
}

TEST_CASE("constant vectors are fixed points (R(0) = 1)") {
    for (auto [id, order, cfl] : {std::tuple{Scheme::Heun2, 2, 0.4},
                                  std::tuple{Scheme::SSPRK3, 3, 1.4},
                                  std::tuple{Scheme::SDIRK3, 3, 1.0}}) {
        const TimeStepper phi = cfl_stepper(id, order, cfl, 16);
        const Spectrum lam = stepper_spectrum(phi);
        CHECK(std::abs(lam[0] - 1.0) <= 1e-13);
    }
    // Explicit path: apply the stencil to an actual constant vector.
    const TimeStepper heun = cfl_stepper(Scheme::Heun2, 2, 0.4, 16);
    const std::vector<double> ones(16, 1.0);
    for (double v : apply(heun.explicit_part, ones)) {
        CHECK(std::abs(v - 1.0) <= 1e-13);
    }
}

TEST_CASE("Heun2 with order-2 straddles the CFL 1/2 stability edge") {
    CHECK(max_abs_spectrum(cfl_stepper(Scheme::Heun2, 2, 0.49, 64)) <= 1.0 + 1e-12);
    CHECK(max_abs_spectrum(cfl_stepper(Scheme::Heun2, 2, 0.51, 64)) > 1.0 + 1e-12);
    CHECK(max_abs_spectrum(cfl_stepper(Scheme::Heun2, 2, 0.4, 64)) <= 1.0 + 1e-12);
}

TEST_CASE("SSPRK3 with order-3 is stable at CFL 1.4 and unstable at 1.7") {
    CHECK(max_abs_spectrum(cfl_stepper(Scheme::SSPRK3, 3, 1.4, 64)) <= 1.0 + 1e-12);
    CHECK(max_abs_spectrum(cfl_stepper(Scheme::SSPRK3, 3, 1.7, 64)) > 1.0 + 1e-12);
}

TEST_CASE("rediscretization at m=1 reproduces the fine stepper") {
    const int n = 16;
    const double dx = 2.0 / n;
    const CirculantStencil L = spatial_stencil(3, 1.0, dx, n);
    const ButcherTableau tab = tableau(Scheme::SDIRK3);
    const TimeStepper fine = build_time_stepper(L, tab, dx);
    const TimeStepper coarse = rediscretized_coarse(L, tab, 1, dx);
    for (int j = 0; j < n; ++j) {
        CHECK(coarse.explicit_part.c[j] == doctest::Approx(fine.explicit_part.c[j]).epsilon(1e-15));
        CHECK(coarse.implicit_part.c[j] == doctest::Approx(fine.implicit_part.c[j]).epsilon(1e-15));
    }
    CHECK(coarse.dt == fine.dt);
}

TEST_CASE("rediscretized SSPRK3 goes unstable at doubled step") {
    const int n = 64;
    const double dx = 2.0 / n;
    const CirculantStencil L = spatial_stencil(3, 1.0, dx, n);
    const TimeStepper psi = rediscretized_coarse(L, tableau(Scheme::SSPRK3), 2, 1.4 * dx);
    CHECK(max_abs_spectrum(psi) > 1.0);
}

TEST_CASE("rediscretized SDIRK3 stays stable for any coarsening") {
    const int n = 64;
    const double dx = 2.0 / n;
    const CirculantStencil L = spatial_stencil(3, 1.0, dx, n);
    for (int m : {1, 2, 4, 8}) {
        const TimeStepper psi = rediscretized_coarse(L, tableau(Scheme::SDIRK3), m, dx);
        CHECK(max_abs_spectrum(psi) <= 1.0 + 1e-12);
    }
}
