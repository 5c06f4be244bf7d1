// oracles.hpp — test-only reference computations and random generators. Nothing
// here calls into the code paths it is used to check.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

// 40-digit mpmath evaluations.
namespace frozen {
inline constexpr double spectral_density_1p6 = 0.0136343006234593817;   // 0.016 e^{-0.16}
inline constexpr double occupation_1p6_0p4 = 0.0186573603637740479;     // 1/(e^4 - 1)
inline constexpr double zero_rate_eta001_T04 = 0.0251327412287183459;   // 2 pi 0.004
inline constexpr double probe_W_t1 = -0.486034731395902133;              // kappa .8, T .4, eta .01, Omega 10
inline constexpr double probe_X_t1_re = -0.299196376568821631;
inline constexpr double probe_X_t1_im = -0.183439798169900911;
inline constexpr double x_star = 1.19967864025773383;
inline constexpr double qsnr_star = 0.439228839890645151;
inline constexpr double steady_qfi_048_04 = 2.74517996586668079;
}  // namespace frozen

inline double bisect(const std::function<double(double)>& f, double a, double b, double tol = 1e-14) {
    double fa = f(a);
    for (int i = 0; i < 200 && b - a > tol; ++i) {
        const double m = 0.5 * (a + b);
        const double fm = f(m);
        if ((fm < 0) == (fa < 0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

// Single pure-dephasing channel at rate 2 pi eta T: r_x(t) = exp(-Gamma t), Gamma = 4 pi eta T.
inline double direct_probe_qfi(double t, double eta, double T) {
    if (t == 0.0) return 0.0;
    const double gamma = 4.0 * std::numbers::pi * eta * T;
    const double a = 4.0 * std::numbers::pi * eta * t;
    return a * a * std::exp(-2.0 * gamma * t) / (1.0 - std::exp(-2.0 * gamma * t));
}

// Binary-distribution Fisher information (m')^2 / (1 - m^2) of p = (1 + m)/2.
inline double binary_fisher(double m, double dm) { return dm * dm / (1.0 - m * m); }

// Every Bohr frequency E_m - E_n whose eigenbasis matrix element <n|A|m> is nonzero,
// from all d^2 eigenvalue pairs.
inline std::vector<double> brute_force_bohr_frequencies(const Matrix& H, const Matrix& A,
                                                        double tol = 1e-9) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(H);
    const Matrix Ae = es.eigenvectors().adjoint() * A * es.eigenvectors();
    std::vector<double> found;
    const auto n = es.eigenvalues().size();
    // within degenerate blocks the matrix elements depend on the basis; sum the block
    for (Eigen::Index m = 0; m < n; ++m) {
        for (Eigen::Index k = 0; k < n; ++k) {
            const double w = es.eigenvalues()(m) - es.eigenvalues()(k);
            double weight = 0.0;
            for (Eigen::Index mm = 0; mm < n; ++mm)
                for (Eigen::Index kk = 0; kk < n; ++kk)
                    if (std::abs(es.eigenvalues()(mm) - es.eigenvalues()(m)) < tol &&
                        std::abs(es.eigenvalues()(kk) - es.eigenvalues()(k)) < tol)
                        weight += std::norm(Ae(kk, mm));
            if (weight < 1e-20) continue;
            bool dup = false;
            for (double f : found) dup = dup || std::abs(f - w) < tol;
            if (!dup) found.push_back(std::abs(w) < tol ? 0.0 : w);
        }
    }
    std::sort(found.begin(), found.end());
    return found;
}

// --------------------------- generators ------------------------------------

inline Matrix random_matrix(std::mt19937_64& rng, int dim, double scale = 1.0) {
    std::normal_distribution<double> g(0.0, scale);
    Matrix m(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) m(i, j) = cplx(g(rng), g(rng));
    return m;
}

inline Matrix random_hermitian(std::mt19937_64& rng, int dim, double scale = 1.0) {
    const Matrix m = random_matrix(rng, dim, scale);
    return 0.5 * (m + m.adjoint());
}

inline Matrix random_density(std::mt19937_64& rng, int dim) {
    const Matrix g = random_matrix(rng, dim);
    Matrix rho = g * g.adjoint();
    return rho / rho.trace();
}


}  // namespace oracle
