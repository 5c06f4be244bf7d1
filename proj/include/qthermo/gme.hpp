// gme.hpp — global Markovian master equation: Ohmic rates, Bohr-frequency jump
// operators in the eigenbasis of the full system Hamiltonian, and the Liouvillian
// superoperator (local, common and cross dissipators).
//
// Vectorization is column stacking:
//   L = -i (1 (x) H - H^T (x) 1) + sum_ij g_ij(w) (conj(A_i) (x) A_j
//         - 1/2 1 (x) A_i^+ A_j - 1/2 (A_i^+ A_j)^T (x) 1)
// where g_ij is the (Hermitian, PSD) rate matrix of the couplings that share a bath.

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "qthermo/errors.hpp"
#include "qthermo/models.hpp"
#include "qthermo/qmat.hpp"

namespace qthermo::gme {

using models::BathSpec;

inline constexpr double kFrequencyTolerance = 1e-9;
inline constexpr double kChannelPruneTolerance = 1e-12;

// --------------------------- bath functions --------------------------------

// J(w) = eta w exp(-w / Omega)
inline double spectral_density(double omega, const BathSpec& bath) {
    if (omega < 0.0)
        throw Error(ErrorKind::NegativeFrequency, "spectral density needs omega >= 0");
    return bath.eta * omega * std::exp(-omega / bath.cutoff);
}

// n(w) = 1 / (exp(w/T) - 1)
inline double thermal_occupation(double omega, double T) {
    if (!(omega > 0.0) || !(T > 0.0))
        throw Error(ErrorKind::NonPositiveInput, "thermal occupation needs omega > 0 and T > 0");
    return 1.0 / std::expm1(omega / T);
}

// Rate entry of two couplings (to the same bath) at signed Bohr frequency omega:
// 2 pi sqrt(J_a J_b) (n + 1) for omega > 0, 2 pi sqrt(J_a J_b) n(|omega|) for omega < 0,
// and the Ohmic limit 2 pi sqrt(eta_a eta_b) T at omega = 0.
inline double cross_rate(double omega, const BathSpec& a, const BathSpec& b) {
    const double T = a.temperature;
    const double w = std::abs(omega);
    if (w == 0.0)
        return 2.0 * std::numbers::pi * std::sqrt(a.eta * b.eta) * T;
    const double j = std::sqrt(spectral_density(w, a) * spectral_density(w, b));
    if (!(T > 0.0))
        throw Error(ErrorKind::NonPositiveInput, "rate needs T > 0");
    // n + 1 written as 1 / (1 - exp(-w/T)) keeps the T -> 0 limit finite.
    const double occupation = omega > 0.0 ? -1.0 / std::expm1(-w / T) : 1.0 / std::expm1(w / T);
    return 2.0 * std::numbers::pi * j * occupation;
}

inline double rate(double omega, const BathSpec& bath) {
    return cross_rate(omega, bath, bath);
}

// --------------------------- jump operators --------------------------------

struct JumpChannel {
    double omega{0.0};
    Matrix op;
    int bath_index{0};
    int coupling_index{0};
};

namespace detail {

struct Level {
    double energy;
    Matrix projector;
};

inline std::vector<Level> energy_levels(const Matrix& H, double freq_tol) {
    const qmat::EigenSystem es = qmat::eig_hermitian(H);
    std::vector<Level> levels;
    Eigen::Index start = 0;
    const Eigen::Index n = es.values.size();
    while (start < n) {
        Eigen::Index stop = start + 1;
        while (stop < n && es.values(stop) - es.values(start) <= freq_tol) ++stop;
        const Matrix v = es.vectors.middleCols(start, stop - start);
        levels.push_back({es.values.segment(start, stop - start).mean(), v * v.adjoint()});
        start = stop;
    }
    return levels;
}

}  // namespace detail

// A(w) = sum_{E_m - E_n = w} Pi(n) A Pi(m), sorted by ascending w.
inline std::vector<JumpChannel> jump_operators(const Matrix& H, const Matrix& A,
                                               double freq_tol = kFrequencyTolerance) {
    if (!(freq_tol > 0.0))
        throw Error(ErrorKind::ValidationError, "freq_tol must be > 0");
    if (A.rows() != H.rows() || A.cols() != H.cols())
        throw Error(ErrorKind::BadDimension, "coupling operator and Hamiltonian dimensions differ");
    const auto levels = detail::energy_levels(H, freq_tol);

    struct Gap {
        double omega;
        std::size_t m, n;
    };
    std::vector<Gap> gaps;
    for (std::size_t m = 0; m < levels.size(); ++m)
        for (std::size_t n = 0; n < levels.size(); ++n)
            gaps.push_back({levels[m].energy - levels[n].energy, m, n});
    std::stable_sort(gaps.begin(), gaps.end(),
                     [](const Gap& a, const Gap& b) { return a.omega < b.omega; });

    std::vector<JumpChannel> channels;
    std::size_t i = 0;
    while (i < gaps.size()) {
        std::size_t j = i;
        Matrix op = Matrix::Zero(H.rows(), H.cols());
        double sum = 0.0;
        while (j < gaps.size() && gaps[j].omega - gaps[i].omega <= freq_tol) {
            op += levels[gaps[j].n].projector * A * levels[gaps[j].m].projector;
            sum += gaps[j].omega;
            ++j;
        }
        double omega = sum / static_cast<double>(j - i);
        if (std::abs(omega) <= freq_tol) omega = 0.0;
        if (qmat::max_abs(op) >= kChannelPruneTolerance)
            channels.push_back({omega, std::move(op), 0, 0});
        i = j;
    }
    return channels;
}

// --------------------------- Liouvillian -----------------------------------

// How the zero-Bohr-frequency (pure dephasing) channel is treated.
//  OhmicLimit: rate 2 pi eta T, the w -> 0 limit of 2 pi J(w) n(w) for Ohmic J.
//  Drop:       the channel is omitted, i.e. J(0) = 0 is taken literally.
enum class ZeroFrequencyRate { OhmicLimit, Drop };

inline std::string_view to_string(ZeroFrequencyRate z) {
    return z == ZeroFrequencyRate::OhmicLimit ? "ohmic_limit" : "drop";
}

inline ZeroFrequencyRate parse_zero_frequency_rate(std::string_view s) {
    if (s == "ohmic_limit" || s == "ohmic") return ZeroFrequencyRate::OhmicLimit;
    if (s == "drop") return ZeroFrequencyRate::Drop;
    throw Error(ErrorKind::ValidationError, "zero_rate must be 'ohmic_limit' or 'drop'");
}

// The direct probe has nothing but the w = 0 channel, so it keeps the Ohmic limit.
// The coupled models drop it, which is the convention under which the reduced
// probe state has the known closed form (see analytic.hpp).
inline ZeroFrequencyRate default_zero_frequency_rate(const models::Model& m) {
    return std::holds_alternative<models::DirectProbeModel>(m) ? ZeroFrequencyRate::OhmicLimit
                                                               : ZeroFrequencyRate::Drop;
}

struct Options {
    std::optional<ZeroFrequencyRate> zero_rate{};  // empty: model default
    double freq_tol{kFrequencyTolerance};
};

struct RatedChannel {
    JumpChannel channel;
    double rate;
};

// Off-diagonal term of a shared bath, pairing coupling i with coupling j at omega.
struct CrossTerm {
    double omega;
    int coupling_i;
    int coupling_j;
    double rate;
};

struct Liouvillian {
    Matrix superop;
    Matrix hamiltonian;
    Eigen::Index dim{0};
    std::vector<RatedChannel> channels;
    std::vector<CrossTerm> cross_terms;
    ZeroFrequencyRate zero_rate{ZeroFrequencyRate::OhmicLimit};

    Matrix apply(const Matrix& rho) const {
        return qmat::unvec(superop * qmat::vec(rho), dim);
    }
};

namespace detail {

// Superoperator of X -> A X B^+ - 1/2 {B^+ A, X}.
inline Matrix dissipator_super(const Matrix& A, const Matrix& B) {
    const Eigen::Index d = A.rows();
    const Matrix id = qmat::identity(d);
    const Matrix BdA = B.adjoint() * A;
    return qmat::kron(B.conjugate(), A) - 0.5 * qmat::kron(id, BdA)
           - 0.5 * qmat::kron(BdA.transpose(), id);
}

}  // namespace detail

inline Matrix hamiltonian_super(const Matrix& H) {
    const Matrix id = qmat::identity(H.rows());
    return -qmat::I * (qmat::kron(id, H) - qmat::kron(H.transpose(), id));
}

inline Matrix dissipator_super(const Matrix& A) {
    return detail::dissipator_super(A, A);
}

inline Liouvillian build_liouvillian(const Matrix& H, const std::vector<models::Coupling>& couplings,
                                     ZeroFrequencyRate zero_rate,
                                     double freq_tol = kFrequencyTolerance) {
    Liouvillian L;
    L.dim = H.rows();
    L.hamiltonian = H;
    L.zero_rate = zero_rate;
    L.superop = hamiltonian_super(H);

    std::vector<std::vector<JumpChannel>> per_coupling;
    for (std::size_t c = 0; c < couplings.size(); ++c) {
        couplings[c].bath.validate();
        auto chans = jump_operators(H, couplings[c].op, freq_tol);
        std::erase_if(chans, [&](const JumpChannel& ch) {
            return ch.omega == 0.0 && zero_rate == ZeroFrequencyRate::Drop;
        });
        for (auto& ch : chans) {
            ch.bath_index = couplings[c].bath_index;
            ch.coupling_index = static_cast<int>(c);
        }
        per_coupling.push_back(std::move(chans));
    }

    for (std::size_t c = 0; c < couplings.size(); ++c) {
        for (const auto& ch : per_coupling[c]) {
            const double g = rate(ch.omega, couplings[c].bath);
            L.superop += g * dissipator_super(ch.op);
            L.channels.push_back({ch, g});
        }
    }

    // Shared baths: channels of different couplings at the same omega interfere.
    for (std::size_t a = 0; a < couplings.size(); ++a) {
        for (std::size_t b = 0; b < couplings.size(); ++b) {
            if (a == b || couplings[a].bath_index != couplings[b].bath_index) continue;
            for (const auto& ca : per_coupling[a]) {
                for (const auto& cb : per_coupling[b]) {
                    if (std::abs(ca.omega - cb.omega) > freq_tol) continue;
                    const double g = cross_rate(ca.omega, couplings[a].bath, couplings[b].bath);
                    // A_b rho A_a^+ - 1/2 {A_a^+ A_b, rho}
                    L.superop += g * detail::dissipator_super(cb.op, ca.op);
                    L.cross_terms.push_back({ca.omega, static_cast<int>(a), static_cast<int>(b), g});
                }
            }
        }
    }

    if (!qmat::all_finite(L.superop))
        throw Error(ErrorKind::NonFinite, "Liouvillian has non-finite entries");
    return L;
}

inline Liouvillian build_liouvillian(const models::Model& model, const Options& opts = {}) {
    models::validate(model);
    const ZeroFrequencyRate z = opts.zero_rate.value_or(default_zero_frequency_rate(model));
    return build_liouvillian(models::hamiltonian(model), models::coupling_operators(model), z,
                             opts.freq_tol);
}

// --------------------------- diagnostics -----------------------------------

// Largest violation of Tr L[X] = 0 and L[X^+] = L[X]^+ over the matrix units |i><j|.
struct GeneratorCheck {
    double trace_error{0.0};
    double hermiticity_error{0.0};
};

inline GeneratorCheck check_generator(const Liouvillian& L) {
    GeneratorCheck out;
    const Eigen::Index d = L.dim;
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            Matrix unit = Matrix::Zero(d, d);
            unit(i, j) = 1.0;
            const Matrix image = L.apply(unit);
            const Matrix image_adj = L.apply(unit.adjoint());
            out.trace_error = std::max(out.trace_error, std::abs(image.trace()));
            out.hermiticity_error =
                std::max(out.hermiticity_error, qmat::max_abs(image_adj - image.adjoint()));
        }
    }
    return out;
}

// Choi matrix sum_ij |i><j| (x) Phi(|i><j|) of a superoperator propagator.
inline Matrix choi_matrix(const Matrix& propagator, Eigen::Index dim) {
    Matrix choi = Matrix::Zero(dim * dim, dim * dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        for (Eigen::Index j = 0; j < dim; ++j) {
            Matrix unit = Matrix::Zero(dim, dim);
            unit(i, j) = 1.0;
            const Matrix image = qmat::unvec(propagator * qmat::vec(unit), dim);
            choi.block(i * dim, j * dim, dim, dim) = image;
        }
    }
    return choi;
}

}  // namespace qthermo::gme
