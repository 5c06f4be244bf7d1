// metrology.hpp — Fisher information about the bath temperature: spectral QFI,
// Bloch-vector QFI and SLD for a qubit, classical Fisher information of projective
// measurements, single-observable Fisher information, QSNR, and the numerical
// temperature derivative every model goes through.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>
#include <type_traits>
#include <vector>

#include "qthermo/errors.hpp"
#include "qthermo/log.hpp"
#include "qthermo/qmat.hpp"

namespace qthermo::metrology {

// --------------------------- domain types ----------------------------------

struct BlochVector {
    double rx{0.0}, ry{0.0}, rz{0.0};

    double norm2() const { return rx * rx + ry * ry + rz * rz; }
    double purity() const { return 0.5 * (1.0 + norm2()); }
    double dot(const BlochVector& o) const { return rx * o.rx + ry * o.ry + rz * o.rz; }

    // rho = (1 + r.sigma) / 2; for a derivative vector this gives d rho = dr.sigma / 2
    // once the identity part is dropped, see derivative_matrix().
    Matrix state_matrix() const {
        return 0.5 * (qmat::identity(2) + pauli_combination());
    }
    Matrix derivative_matrix() const { return 0.5 * pauli_combination(); }

    Matrix pauli_combination() const {
        return rx * qmat::sigma_x() + ry * qmat::sigma_y() + rz * qmat::sigma_z();
    }

    static BlochVector from_matrix(const Matrix& m) {
        if (m.rows() != 2 || m.cols() != 2)
            throw Error(ErrorKind::BadDimension, "Bloch vector needs a 2x2 operator");
        return {2.0 * m(0, 1).real(), -2.0 * m(0, 1).imag(), (m(0, 0) - m(1, 1)).real()};
    }
};

// Lambda = c0 1 + cx sigma_x + cy sigma_y + cz sigma_z
struct SLDOperator {
    double c0{0.0}, cx{0.0}, cy{0.0}, cz{0.0};

    Matrix matrix() const {
        return c0 * qmat::identity(2) + cx * qmat::sigma_x() + cy * qmat::sigma_y()
               + cz * qmat::sigma_z();
    }
};

struct EstimateRecord {
    double t{0.0};
    double qfi{0.0};            // F_T
    double cfi{0.0};            // measurement Fisher information I_T
    double qsnr{0.0};           // T^2 F_T
    double qfi_per_t{0.0};      // F_T / t, 0 at t = 0
    double coherence_abs{0.0};  // |X|

    // F >= I - 1e-9 and R = T^2 F; returns an empty string when both hold.
    std::string invariant_violation(double T) const {
        std::ostringstream os;
        if (qfi < cfi - 1e-9 * std::max(1.0, qfi))
            os << "measurement FI " << cfi << " exceeds QFI " << qfi << " at t = " << t << ". ";
        if (std::abs(qsnr - T * T * qfi) > 1e-12 * std::max(1.0, qsnr))
            os << "QSNR != T^2 F at t = " << t << ". ";
        if (qfi < 0.0 || cfi < 0.0)
            os << "negative Fisher information at t = " << t << ". ";
        return os.str();
    }
};

inline double qsnr(double T, double F) {
    if (!(F >= 0.0))
        throw Error(ErrorKind::ValidationError, "QSNR needs F >= 0");
    return T * T * F;
}

// --------------------------- temperature derivatives -----------------------

inline double default_step(double T) { return std::max(1e-5, 1e-4 * T); }

struct DerivativeSettings {
    double h{0.0};                 // 0: default_step(T)
    double richardson_tol{1e-5};   // relative disagreement allowed between h and h/2
    double absolute_floor{1e-3};   // derivative scale below which the check is absolute
};

namespace detail {

inline Matrix as_matrix(const Matrix& m) { return m; }
inline Matrix as_matrix(const DensityMatrix& m) { return m.mat(); }

inline void check_step(double T, double h) {
    if (!(h > 0.0) || !(T - h > 0.0)) {
        std::ostringstream os;
        os << "finite-difference step " << h << " invalid at T = " << T;
        throw Error(ErrorKind::NonPositiveInput, os.str());
    }
}

inline void richardson_check(const Matrix& coarse, const Matrix& fine,
                             const DerivativeSettings& s, double T) {
    const double diff = qmat::max_abs(coarse - fine);
    const double scale = std::max(qmat::max_abs(fine), s.absolute_floor);
    if (diff > s.richardson_tol * scale) {
        std::ostringstream os;
        os << "central differences with h and h/2 disagree by " << diff / scale
           << " (relative) at T = " << T;
        throw Error(ErrorKind::StepTooLarge, os.str());
    }
}

}  // namespace detail

// (rho(T+h) - rho(T-h)) / 2h, validated against the same stencil at h/2.
template <class StateFn>
Matrix d_rho_dT(StateFn&& state_fn, double T, DerivativeSettings s = {}) {
    const double h = s.h > 0.0 ? s.h : default_step(T);
    detail::check_step(T, h);
    auto eval = [&](double x) { return detail::as_matrix(state_fn(x)); };
    const Matrix coarse = (eval(T + h) - eval(T - h)) / (2.0 * h);
    const Matrix fine = (eval(T + h / 2) - eval(T - h / 2)) / h;
    detail::richardson_check(coarse, fine, s, T);
    return coarse;
}

// Same stencil applied element-wise to a family of states (a trajectory) that is
// computed once per temperature.
template <class SeriesFn>
std::vector<Matrix> d_rho_dT_series(SeriesFn&& series_fn, double T, DerivativeSettings s = {}) {
    const double h = s.h > 0.0 ? s.h : default_step(T);
    detail::check_step(T, h);
    auto eval = [&](double x) {
        std::vector<Matrix> out;
        for (const auto& m : series_fn(x)) out.push_back(detail::as_matrix(m));
        return out;
    };
    const auto plus = eval(T + h), minus = eval(T - h);
    const auto plus_half = eval(T + h / 2), minus_half = eval(T - h / 2);
    std::vector<Matrix> out(plus.size());
    for (std::size_t k = 0; k < plus.size(); ++k) {
        out[k] = (plus[k] - minus[k]) / (2.0 * h);
        const Matrix fine = (plus_half[k] - minus_half[k]) / h;
        detail::richardson_check(out[k], fine, s, T);
    }
    return out;
}

// --------------------------- quantum Fisher information --------------------

inline constexpr double kEigenCutoff = 1e-12;

// F = 2 sum_{k,l} |<k| d rho |l>|^2 / (lambda_k + lambda_l), over pairs above the cutoff.
inline double qfi_spectral(const Matrix& rho, const Matrix& drho, double eig_cutoff = kEigenCutoff) {
    if (rho.rows() != drho.rows() || rho.cols() != drho.cols())
        throw Error(ErrorKind::BadDimension, "state and derivative dimensions differ");
    Eigen::SelfAdjointEigenSolver<Matrix> solver(qmat::hermitize(rho));
    const Eigen::VectorXd& lambda = solver.eigenvalues();
    const Matrix& V = solver.eigenvectors();
    const Matrix M = V.adjoint() * drho * V;
    double F = 0.0;
    double dropped = 0.0;
    for (Eigen::Index k = 0; k < lambda.size(); ++k) {
        for (Eigen::Index l = 0; l < lambda.size(); ++l) {
            const double num = std::norm(M(k, l));
            const double den = lambda(k) + lambda(l);
            if (den > eig_cutoff)
                F += 2.0 * num / den;
            else
                dropped = std::max(dropped, num);
        }
    }
    if (dropped >= 1e-24) {
        std::ostringstream os;
        os << "QFI: derivative weight " << dropped
           << " outside the support of rho was dropped (boundary of the state space)";
        log::warn(os.str());
    }
    return std::max(F, 0.0);
}

inline double qfi_spectral(const DensityMatrix& rho, const Matrix& drho,
                           double eig_cutoff = kEigenCutoff) {
    return qfi_spectral(rho.mat(), drho, eig_cutoff);
}

inline constexpr double kPureThreshold = 1e-9;

// (dP)^2 (1 - |r|^2) / (4 (P - 1)^2) + |dr|^2 with dP = r.dr; near-pure states go
// through the spectral formula instead.
inline double qfi_bloch(const BlochVector& r, const BlochVector& dr) {
    const double r2 = r.norm2();
    if (r2 > 1.0 - kPureThreshold)
        return qfi_spectral(r.state_matrix(), dr.derivative_matrix());
    const double P = r.purity();
    const double dP = r.dot(dr);
    return dP * dP * (1.0 - r2) / (4.0 * (P - 1.0) * (P - 1.0)) + dr.norm2();
}

inline SLDOperator sld(const BlochVector& r, const BlochVector& dr) {
    const double r2 = r.norm2();
    if (r2 > 1.0 - kPureThreshold)
        throw Error(ErrorKind::PureStateSingularity, "SLD coefficients are singular at |r| = 1");
    const double P = r.purity();
    const double dP = r.dot(dr);
    const double k = dP / (2.0 - 2.0 * P);
    return {dP / (2.0 * (P - 1.0)), r.rx * k + dr.rx, r.ry * k + dr.ry, r.rz * k + dr.rz};
}

// --------------------------- classical Fisher information ------------------

inline constexpr double kTinyProbability = 1e-14;

// F^C = sum_i (dp_i)^2 / p_i
inline double cfi_povm(const std::vector<double>& probs, const std::vector<double>& dprobs) {
    if (probs.size() != dprobs.size() || probs.empty())
        throw Error(ErrorKind::BadDimension, "probability and derivative lists differ in size");
    const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
    const double dtotal = std::accumulate(dprobs.begin(), dprobs.end(), 0.0);
    if (std::abs(total - 1.0) > 1e-9)
        throw Error(ErrorKind::ValidationError, "probabilities do not sum to 1");
    if (std::abs(dtotal) > 1e-8)
        throw Error(ErrorKind::ValidationError, "probability derivatives do not sum to 0");
    double F = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] < -1e-12)
            throw Error(ErrorKind::ValidationError, "negative probability");
        if (probs[i] < kTinyProbability) {
            if (std::abs(dprobs[i]) < kTinyProbability) continue;
            std::ostringstream os;
            os << "outcome " << i << " has probability " << probs[i] << " but derivative "
               << dprobs[i];
            throw Error(ErrorKind::SingularOutcome, os.str());
        }
        F += dprobs[i] * dprobs[i] / probs[i];
    }
    return F;
}

struct OutcomeDistribution {
    std::vector<double> probs;
    std::vector<double> dprobs;
};

// Born-rule probabilities of a projective measurement in the orthonormal columns of basis.
inline OutcomeDistribution projective_outcomes(const Matrix& rho, const Matrix& drho,
                                               const Matrix& basis) {
    if (basis.rows() != rho.rows())
        throw Error(ErrorKind::BadDimension, "measurement basis dimension mismatch");
    OutcomeDistribution out;
    for (Eigen::Index i = 0; i < basis.cols(); ++i) {
        const Vector e = basis.col(i);
        out.probs.push_back((e.adjoint() * rho * e)(0).real());
        out.dprobs.push_back((e.adjoint() * drho * e)(0).real());
    }
    return out;
}

// --------------------------- single observable -----------------------------

inline constexpr double kMinVariance = 1e-14;

// I = (d<X>/dT)^2 / Var(X)
inline double measurement_fi(const Matrix& observable, const Matrix& rho, const Matrix& drho) {
    if (qmat::hermiticity_error(observable) > qmat::kHermiticityTolerance)
        throw Error(ErrorKind::NonHermitianInput, "observable must be Hermitian");
    const double mean = (rho * observable).trace().real();
    const double second = (rho * observable * observable).trace().real();
    const double variance = second - mean * mean;
    if (!(variance > kMinVariance)) {
        std::ostringstream os;
        os << "observable variance " << variance << " too small";
        throw Error(ErrorKind::ZeroVariance, os.str());
    }
    const double dmean = (drho * observable).trace().real();
    return dmean * dmean / variance;
}

template <class StateFn>
double measurement_fi(const Matrix& observable, StateFn&& rho_fn, double T,
                      DerivativeSettings s = {}) {
    const Matrix rho = detail::as_matrix(rho_fn(T));
    const Matrix drho = d_rho_dT(rho_fn, T, s);
    return measurement_fi(observable, rho, drho);
}

}  // namespace qthermo::metrology
