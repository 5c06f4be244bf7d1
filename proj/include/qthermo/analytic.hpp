// analytic.hpp — closed forms: reduced probe state of the probe-ancilla model,
// two-qubit steady state, steady-state QFI and the QSNR optimum.

#pragma once

#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <utility>

#include "qthermo/errors.hpp"
#include "qthermo/models.hpp"
#include "qthermo/qmat.hpp"

namespace qthermo::analytic {

// --------------------------- probe + ancilla -------------------------------

// Population W, coherence X and the auxiliary rates B, Z1, Z2 of the reduced probe
// state [[(1+W)/2, X], [X*, (1-W)/2]]. Valid for omega_P = omega_A = 1, ancilla in
// |+>, probe in |1>, and the w = 0 channel dropped from the master equation.
struct ProbeClosedForm {
    double W;
    cplx X;
    cplx B, Z1, Z2;
};

inline ProbeClosedForm probe_closed_form(double t, double kappa, const models::BathSpec& bath) {
    if (!(t >= 0.0))
        throw Error(ErrorKind::ValidationError, "t must be >= 0");
    if (!(kappa > 0.0))
        throw Error(ErrorKind::ValidationError, "kappa must be > 0");
    bath.validate();
    const double pi = std::numbers::pi;
    const double eta = bath.eta, Om = bath.cutoff, T = bath.temperature;
    const double coth = 1.0 / std::tanh(kappa / T);
    const double csch = 1.0 / std::sinh(kappa / T);
    const cplx i = qmat::I;

    ProbeClosedForm f{};
    f.B = 2.0 * kappa * (pi * eta * std::exp(-2.0 * kappa / Om) * coth + i);
    f.Z1 = i * pi * eta * kappa * std::exp(-2.0 * kappa / Om) * (coth - 1.0) + kappa - 1.0;
    f.Z2 = pi * eta * kappa * std::exp(kappa * (1.0 / T - 2.0 / Om)) * csch + i * (kappa + 1.0);

    // sinh(Bt) - cosh(Bt) = -exp(-Bt)
    const cplx w = 0.25 * (-2.0 - (1.0 + std::exp(4.0 * i * kappa * t)) * std::exp(-f.B * t));
    f.W = w.real();
    f.X = 0.25 * (std::exp(-f.Z2 * t) - std::exp(i * f.Z1 * t));
    return f;
}

inline DensityMatrix probe_state_closed_form(double t, double kappa, const models::BathSpec& bath) {
    const ProbeClosedForm f = probe_closed_form(t, kappa, bath);
    Matrix rho(2, 2);
    rho << 0.5 * (1.0 + f.W), f.X, std::conj(f.X), 0.5 * (1.0 - f.W);
    return DensityMatrix::unchecked(std::move(rho));
}

// --------------------------- two qubits ------------------------------------

// 1/2 (|01><01| + |10><10|) + 1/2 tanh(-kappa/T) (|01><10| + |10><01|)
inline DensityMatrix steady_two_qubit(double kappa, double T) {
    if (!(kappa >= 0.0) || !(T > 0.0))
        throw Error(ErrorKind::ValidationError, "steady_two_qubit needs kappa >= 0 and T > 0");
    Matrix rho = Matrix::Zero(4, 4);
    const double c = 0.5 * std::tanh(-kappa / T);
    rho(1, 1) = 0.5;
    rho(2, 2) = 0.5;
    rho(1, 2) = c;
    rho(2, 1) = c;
    return DensityMatrix::unchecked(std::move(rho));
}

// 2 kappa^2 / (T^4 (cosh(2 kappa/T) + 1))
inline double steady_qfi(double kappa, double T) {
    if (!(kappa >= 0.0) || !(T > 0.0))
        throw Error(ErrorKind::ValidationError, "steady_qfi needs kappa >= 0 and T > 0");
    const double x = 2.0 * kappa / T;
    if (x > 700.0) return 0.0;
    return 2.0 * kappa * kappa / (std::pow(T, 4) * (std::cosh(x) + 1.0));
}

// T^2 F(inf) as a function of x = kappa / T: x^2 sech^2(x).
inline double steady_qsnr(double ratio) {
    if (std::abs(ratio) > 350.0) return 0.0;
    const double s = 1.0 / std::cosh(ratio);
    return ratio * ratio * s * s;
}

struct OptimalRatio {
    double x_star;
    double qsnr_star;
};

// d/dx [x^2 sech^2 x] = 0  <=>  tanh(x) = 1/x, bracketed on [1, 2].
inline OptimalRatio optimal_ratio(double tol = 1e-12) {
    auto f = [](double x) { return x * std::tanh(x) - 1.0; };
    std::uintmax_t max_iter = 200;
    auto term = [tol](double a, double b) { return std::abs(b - a) <= tol; };
    const auto [lo, hi] = boost::math::tools::toms748_solve(f, 1.0, 2.0, term, max_iter);
    const double x = 0.5 * (lo + hi);
    return {x, steady_qsnr(x)};
}

}  // namespace qthermo::analytic
