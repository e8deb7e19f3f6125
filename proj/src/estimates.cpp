#include "mgritopt/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "mgritopt/circulant.hpp"

namespace mgritopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool lfa_feasible(cplx mu) { return std::abs(mu) < 1.0; }
bool dobrev_feasible(cplx lambda, cplx mu) {
    return std::abs(lambda) < 1.0 && std::abs(mu) < 1.0;
}

// (1 - a^p) / (1 - a) with the limit value p when a is within 1e-14 of 1.
double geometric_sum(double a, double p) {
    if (std::abs(1.0 - a) <= 1e-14) return p;
    return (1.0 - std::pow(a, p)) / (1.0 - a);
}

void check_coarsening(int m, int nt) {
    if (m < 2) throw std::invalid_argument("coarsening factor must be at least 2");
    if (nt < m || nt % m != 0) {
        throw std::invalid_argument("n_t must be a positive multiple of m");
    }
}

}  // namespace

std::string estimator_name(EstimatorId id) {
    switch (id) {
        case EstimatorId::LfaF: return "lfa-f";
        case EstimatorId::LfaFCF: return "lfa-fcf";
        case EstimatorId::DobrevF: return "dobrev-f";
        case EstimatorId::DobrevFCF: return "dobrev-fcf";
    }
    throw std::invalid_argument("unknown estimator id");
}

EstimatorId estimator_from_name(const std::string& name) {
    std::string s;
    for (char c : name) s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (s == "lfa-f") return EstimatorId::LfaF;
    if (s == "lfa-fcf") return EstimatorId::LfaFCF;
    if (s == "dobrev-f") return EstimatorId::DobrevF;
    if (s == "dobrev-fcf") return EstimatorId::DobrevFCF;
    throw std::invalid_argument("unknown estimator: " + name);
}

double lfa_estimate(cplx lambda, cplx mu, Relax relax) {
    if (relax == Relax::C) throw std::invalid_argument("LFA estimate is defined for F and FCF relaxation");
    const double amu = std::abs(mu);
    if (amu >= 1.0) {
        throw std::domain_error("LFA estimate is singular for |mu| >= 1");
    }
    const double alam = std::abs(lambda);
    const double f_value =
        std::sqrt(1.0 + alam * alam) * std::abs(lambda * lambda - mu) / (1.0 - amu);
    return relax == Relax::FCF ? alam * alam * f_value : f_value;
}

double dobrev_value(cplx lambda, cplx mu, int m, int nt, Relax relax) {
    check_coarsening(m, nt);
    if (relax == Relax::C) throw std::invalid_argument("Dobrev bound is defined for F and FCF relaxation");
    const double amu = std::abs(mu);
    const double gap = std::abs(ipow(lambda, m) - mu);
    const double nc = static_cast<double>(nt) / m;
    if (relax == Relax::F) {
        return gap * geometric_sum(amu, nc);
    }
    const double alam_m = std::pow(std::abs(lambda), m);
    return alam_m * gap * geometric_sum(amu, nc - 1.0);
}

double dobrev_bound(cplx lambda, cplx mu, int m, int nt, Relax relax) {
    if (std::abs(lambda) >= 1.0 || std::abs(mu) >= 1.0) {
        throw std::domain_error("Dobrev bound assumes |lambda| < 1 and |mu| < 1");
    }
    return dobrev_value(lambda, mu, m, nt, relax);
}

WorstCaseReport worst_case(const Spectrum& lambda, const Spectrum& mu, EstimatorId id, int m,
                           int nt) {
    if (lambda.size() != mu.size()) {
        throw std::invalid_argument("spectrum lengths differ");
    }
    const int n = static_cast<int>(lambda.size());
    if (n == 0) throw std::invalid_argument("empty spectrum");
    const bool is_lfa = (id == EstimatorId::LfaF || id == EstimatorId::LfaFCF);
    const Relax relax =
        (id == EstimatorId::LfaF || id == EstimatorId::DobrevF) ? Relax::F : Relax::FCF;
    if (is_lfa && m != 2) {
        throw std::invalid_argument("LFA estimates are derived for m = 2 only");
    }
    check_coarsening(m, nt);

    WorstCaseReport rep;
    rep.wavenumbers.resize(n);
    rep.values.resize(n);
    const int k_lo = -(n / 2);
    for (int i = 0; i < n; ++i) {
        const int k = k_lo + i;
        const int j = natural_index(k, n);
        rep.wavenumbers[i] = k;
        double v;
        if (is_lfa) {
            v = lfa_feasible(mu[j]) ? lfa_estimate(lambda[j], mu[j], relax) : kInf;
        } else {
            v = dobrev_feasible(lambda[j], mu[j])
                    ? dobrev_value(lambda[j], mu[j], m, nt, relax)
                    : kInf;
        }
        rep.values[i] = v;
        if (std::isinf(v)) {
            rep.has_infeasible = true;
            rep.infeasible.push_back(k);
        }
    }

    // Deterministic argmax with ties broken toward smaller |k| (then smaller k).
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const int ka = rep.wavenumbers[a], kb = rep.wavenumbers[b];
        if (std::abs(ka) != std::abs(kb)) return std::abs(ka) < std::abs(kb);
        return ka < kb;
    });
    double best = -1.0;
    int best_k = rep.wavenumbers[order[0]];
    for (int i : order) {
        if (rep.values[i] > best) {
            best = rep.values[i];
            best_k = rep.wavenumbers[i];
        }
    }
    rep.max_value = best;
    rep.argmax_k = best_k;
    return rep;
}

Eigen::MatrixXcd coarse_error_propagator(cplx lambda, cplx mu, int m, int nt, Relax relax) {
    check_coarsening(m, nt);
    if (relax == Relax::C) throw std::invalid_argument("coarse propagator defined for F and FCF relaxation");
    const int nc = nt / m;
    const cplx gap = ipow(lambda, m) - mu;
    Eigen::MatrixXcd e = Eigen::MatrixXcd::Zero(nc, nc);
    for (int i = 0; i < nc; ++i) {
        for (int j = 0; j < i; ++j) {
            e(i, j) = gap * ipow(mu, i - j - 1);
        }
    }
    if (relax == Relax::FCF) {
        // One extra CF sweep multiplies the incoming coarse error by
        // lambda^m times the downshift (the first interval starts from zero).
        Eigen::MatrixXcd shift = Eigen::MatrixXcd::Zero(nc, nc);
        for (int i = 1; i < nc; ++i) shift(i, i - 1) = 1.0;
        e = e * (ipow(lambda, m) * shift);
    }
    return e;
}

Eigen::MatrixXcd mode_error_propagator(cplx lambda, cplx mu, int m, int nt, Relax relax) {
    check_coarsening(m, nt);
    if (relax == Relax::C) throw std::invalid_argument("mode propagator defined for F and FCF relaxation");
    const int nc = nt / m;
    using Mat = Eigen::MatrixXcd;

    // Unknowns e^1..e^nt (row/column i holds time level i+1; e^0 = 0).
    Mat a = Mat::Identity(nt, nt);
    for (int i = 1; i < nt; ++i) a(i, i - 1) = -lambda;

    Mat ac = Mat::Identity(nc, nc);
    for (int i = 1; i < nc; ++i) ac(i, i - 1) = -mu;

    // Injection restriction: pick the C-point rows (time levels m, 2m, ...).
    Mat r = Mat::Zero(nc, nt);
    for (int n = 0; n < nc; ++n) r(n, (n + 1) * m - 1) = 1.0;

    // Ideal interpolation: identity at C-points, lambda^j propagation to the
    // following F-points.
    Mat p = Mat::Zero(nt, nc);
    for (int n = 0; n < nc; ++n) {
        for (int j = 0; j < m; ++j) {
            const int row = (n + 1) * m - 1 + j;
            if (row >= nt) break;
            p(row, n) = ipow(lambda, j);
        }
    }

    // F-relaxation error propagator: C-point rows unchanged, F-point rows
    // propagate from the preceding C-point; the first interval becomes zero.
    Mat sf = Mat::Zero(nt, nt);
    for (int n = 0; n < nc; ++n) {
        const int cpt = (n + 1) * m - 1;
        sf(cpt, cpt) = 1.0;
        for (int j = 1; j < m; ++j) {
            const int row = cpt + j;
            if (row >= nt) break;
            sf(row, cpt) = ipow(lambda, j);
        }
    }

    Mat s = sf;
    if (relax == Relax::FCF) {
        // C-relaxation error propagator: F-point rows unchanged, each C-point
        // row propagates from the preceding time level.
        Mat sc = Mat::Identity(nt, nt);
        for (int n = 0; n < nc; ++n) {
            const int cpt = (n + 1) * m - 1;
            sc.row(cpt).setZero();
            if (cpt >= 1) sc(cpt, cpt - 1) = lambda;
        }
        s = sf * sc * sf;
    }

    return (Mat::Identity(nt, nt) - p * ac.partialPivLu().solve(r * a)) * s;
}

namespace {
double spectral_norm(const Eigen::MatrixXcd& mat) {
    if (mat.rows() <= 32) {
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(mat);
        return svd.singularValues()(0);
    }
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(mat);
    return svd.singularValues()(0);
}
}  // namespace

double mode_block_norm(cplx lambda, cplx mu, int m, int nt, Relax relax) {
    return spectral_norm(mode_error_propagator(lambda, mu, m, nt, relax));
}

double coarse_block_norm(cplx lambda, cplx mu, int m, int nt, Relax relax) {
    return spectral_norm(coarse_error_propagator(lambda, mu, m, nt, relax));
}

double dense_two_level_norm(const TimeStepper& phi, const TimeStepper& psi, int m, int nt, int nx,
                            Relax relax, long cap) {
    if (phi.nx() != nx || psi.nx() != nx) {
        throw std::invalid_argument("stepper size does not match n_x");
    }
    if (static_cast<long>(nx) * nt > cap) {
        throw std::invalid_argument("dense oracle size cap exceeded");
    }
    check_coarsening(m, nt);
    const Spectrum lam = stepper_spectrum(phi);
    const Spectrum mu = stepper_spectrum(psi);
    double worst = 0.0;
    for (int j = 0; j < nx; ++j) {
        worst = std::max(worst, mode_block_norm(lam[j], mu[j], m, nt, relax));
    }
    return worst;
}

double lfa_grid_max(cplx lambda, cplx mu, Relax relax, int npts) {
    if (relax == Relax::C) throw std::invalid_argument("LFA block defined for F and FCF relaxation");
    const double anchor = std::arg(mu);
    double worst = 0.0;
    for (int j = 0; j < npts; ++j) {
        const double theta = anchor + 2.0 * std::numbers::pi * j / npts;
        const cplx denom = std::exp(cplx(0.0, theta)) - mu;
        const cplx c = (lambda * lambda - mu) / denom;
        Eigen::Matrix2cd block;
        block << c, 0.0, lambda * c, 0.0;
        if (relax == Relax::FCF) block *= lambda * lambda;
        Eigen::JacobiSVD<Eigen::Matrix2cd> svd(block);
        worst = std::max(worst, svd.singularValues()(0));
    }
    return worst;
}

}  // namespace mgritopt
