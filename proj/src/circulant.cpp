#include "mgritopt/circulant.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <map>
#include <mutex>

namespace mgritopt {

namespace {

// One cached plan pair per transform size. FFTW planning is not thread-safe
// and the plans execute on shared buffers, so a single lock guards both.
struct PlanEntry {
    fftw_complex* buf = nullptr;
    fftw_plan plus = nullptr;   // FFTW_BACKWARD: +i kernel
    fftw_plan minus = nullptr;  // FFTW_FORWARD: -i kernel
};

std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

std::map<int, PlanEntry>& plan_cache() {
    static std::map<int, PlanEntry> cache;
    return cache;
}

PlanEntry& plans_for(int n) {
    auto& cache = plan_cache();
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    PlanEntry e;
    e.buf = fftw_alloc_complex(static_cast<size_t>(n));
    e.plus = fftw_plan_dft_1d(n, e.buf, e.buf, FFTW_BACKWARD, FFTW_ESTIMATE);
    e.minus = fftw_plan_dft_1d(n, e.buf, e.buf, FFTW_FORWARD, FFTW_ESTIMATE);
    return cache.emplace(n, e).first->second;
}

std::vector<cplx> run_plan(const std::vector<cplx>& x, bool plus) {
    const int n = static_cast<int>(x.size());
    if (n == 0) return {};
    std::vector<cplx> out(x.size());
    std::lock_guard<std::mutex> lock(plan_mutex());
    PlanEntry& e = plans_for(n);
    static_assert(sizeof(fftw_complex) == sizeof(cplx));
    std::memcpy(e.buf, x.data(), sizeof(cplx) * x.size());
    fftw_execute(plus ? e.plus : e.minus);
    std::memcpy(out.data(), e.buf, sizeof(cplx) * x.size());
    return out;
}

std::vector<cplx> complexify(const std::vector<double>& x) {
    std::vector<cplx> z(x.size());
    for (size_t i = 0; i < x.size(); ++i) z[i] = cplx(x[i], 0.0);
    return z;
}

}  // namespace

std::vector<cplx> dft_plus(const std::vector<cplx>& x) { return run_plan(x, true); }

std::vector<cplx> dft_minus(const std::vector<cplx>& x) { return run_plan(x, false); }

Spectrum spectrum(const CirculantStencil& c) {
    return dft_plus(complexify(c.c));
}

CirculantStencil from_spectrum(const Spectrum& s, double imag_tol) {
    const int n = static_cast<int>(s.size());
    std::vector<cplx> col = dft_minus(s);
    CirculantStencil out;
    out.c.resize(s.size());
    for (int j = 0; j < n; ++j) {
        col[j] /= static_cast<double>(n);
        if (std::abs(col[j].imag()) > imag_tol)
            throw std::runtime_error("from_spectrum: imaginary residue " +
                                     std::to_string(col[j].imag()) +
                                     " exceeds tolerance (conjugate-symmetry violation)");
        out.c[j] = col[j].real();
    }
    return out;
}

std::vector<double> apply(const CirculantStencil& c, const std::vector<double>& u) {
    const int n = c.nx();
    if (static_cast<int>(u.size()) != n)
        throw std::invalid_argument("apply: length mismatch");
    int nnz = 0;
    for (double v : c.c)
        if (v != 0.0) ++nnz;
    if (nnz <= 5) {
        std::vector<double> out(u.size(), 0.0);
        for (int d = 0; d < n; ++d) {
            const double cd = c.c[d];
            if (cd == 0.0) continue;
            for (int j = 0; j < n; ++j) out[j] += cd * u[(j - d + n) % n];
        }
        return out;
    }
    Spectrum cs = spectrum(c);
    std::vector<cplx> um = dft_plus(complexify(u));
    for (int k = 0; k < n; ++k) um[k] *= cs[k];
    std::vector<cplx> back = dft_minus(um);
    std::vector<double> out(u.size());
    for (int j = 0; j < n; ++j) out[j] = back[j].real() / n;
    return out;
}

Spectrum stepper_spectrum(const TimeStepper& phi) {
    Spectrum pe = spectrum(phi.explicit_part);
    Spectrum qi = spectrum(phi.implicit_part);
    Spectrum out(pe.size());
    for (size_t k = 0; k < pe.size(); ++k) {
        if (qi[k] == cplx(0.0, 0.0))
            throw std::runtime_error("stepper_spectrum: zero implicit eigenvalue (singular stepper)");
        out[k] = pe[k] / qi[k];
    }
    return out;
}

CirculantStencil power_column(const TimeStepper& phi, int m) {
    if (m < 1) throw std::invalid_argument("power_column: m must be >= 1");
    Spectrum lam = stepper_spectrum(phi);
    Spectrum powered(lam.size());
    for (size_t k = 0; k < lam.size(); ++k) powered[k] = ipow(lam[k], m);
    return from_spectrum(powered);
}

}  // namespace mgritopt
