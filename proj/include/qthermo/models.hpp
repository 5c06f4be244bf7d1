// models.hpp — the physical scenarios: direct dephasing probe, probe + ancilla,
// and two XX+YY-coupled qubits in local or common Ohmic baths.
//
// Units: hbar = k_B = 1, frequencies in units of the qubit splitting.
// Basis ordering for two qubits: {|00>, |01>, |10>, |11>}, first factor is the
// probe (or qubit 1). sigma_z|0> = +|0>.

#pragma once

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "qthermo/errors.hpp"
#include "qthermo/log.hpp"
#include "qthermo/qmat.hpp"

namespace qthermo::models {

struct BathSpec {
    double eta{0.01};          // dimensionless coupling
    double cutoff{10.0};       // Omega
    double temperature{0.4};   // T

    void validate() const {
        if (!(eta >= 0.0) || !std::isfinite(eta))
            throw Error(ErrorKind::ValidationError, "eta must be >= 0");
        if (!(cutoff > 0.0) || !std::isfinite(cutoff))
            throw Error(ErrorKind::ValidationError, "cutoff must be > 0");
        if (!(temperature > 0.0) || !std::isfinite(temperature))
            throw Error(ErrorKind::ValidationError, "temperature must be > 0");
    }
};

struct DirectProbeModel {
    double omega_p{1.0};
    BathSpec bath{};
};

struct ProbeAncillaModel {
    double omega_p{1.0};
    double omega_a{1.0};
    double kappa{0.8};
    BathSpec bath{};
    double theta{std::numbers::pi / 2};  // ancilla preparation angle
};

enum class BathTopology { Local, Common };

// For Common, bath1 and bath2 describe the two coupling strengths to one shared
// reservoir: they must agree on temperature and cutoff.
struct TwoQubitModel {
    double omega0{1.0};
    double kappa{0.6};
    BathTopology topology{BathTopology::Local};
    BathSpec bath1{0.01, 10.0, 0.4};
    BathSpec bath2{0.05, 10.0, 0.4};
    double theta{std::numbers::pi / 2};
};

using Model = std::variant<DirectProbeModel, ProbeAncillaModel, TwoQubitModel>;

// --------------------------- validation ------------------------------------

namespace detail {

inline void require_theta(double theta) {
    if (!(theta >= 0.0 && theta <= std::numbers::pi))
        throw Error(ErrorKind::ValidationError, "theta must lie in [0, pi]");
}

inline void require_frequency(double w, const char* name) {
    if (!(w > 0.0) || !std::isfinite(w))
        throw Error(ErrorKind::ValidationError, std::string(name) + " must be > 0");
}

inline void require_kappa(double kappa) {
    if (!(kappa >= 0.0) || !std::isfinite(kappa))
        throw Error(ErrorKind::ValidationError, "kappa must be >= 0");
}

}  // namespace detail

inline void validate(const DirectProbeModel& m) {
    detail::require_frequency(m.omega_p, "omega_p");
    m.bath.validate();
}

inline void validate(const ProbeAncillaModel& m) {
    detail::require_frequency(m.omega_p, "omega_p");
    detail::require_frequency(m.omega_a, "omega_a");
    detail::require_kappa(m.kappa);
    detail::require_theta(m.theta);
    m.bath.validate();
}

inline void validate(const TwoQubitModel& m) {
    detail::require_frequency(m.omega0, "omega0");
    detail::require_kappa(m.kappa);
    detail::require_theta(m.theta);
    m.bath1.validate();
    m.bath2.validate();
    if (m.topology == BathTopology::Common) {
        if (m.bath1.temperature != m.bath2.temperature || m.bath1.cutoff != m.bath2.cutoff)
            throw Error(ErrorKind::ValidationError,
                        "common bath: both couplings must share temperature and cutoff");
    } else if (m.bath1.temperature != m.bath2.temperature) {
        std::ostringstream os;
        os << "local baths at different temperatures (" << m.bath1.temperature << " vs "
           << m.bath2.temperature << "); the estimated parameter is ambiguous";
        log::warn(os.str());
    }
}

inline void validate(const Model& m) {
    std::visit([](const auto& x) { validate(x); }, m);
}

// --------------------------- Hamiltonians ----------------------------------

namespace detail {

inline Matrix two_qubit_hamiltonian(double w1, double w2, double kappa) {
    using namespace qmat;
    const Matrix id = identity(2);
    return 0.5 * w1 * kron(sigma_z(), id) + 0.5 * w2 * kron(id, sigma_z())
           + 0.5 * kappa * (kron(sigma_x(), sigma_x()) + kron(sigma_y(), sigma_y()));
}

}  // namespace detail

inline Matrix hamiltonian(const DirectProbeModel& m) {
    return 0.5 * m.omega_p * qmat::sigma_z();
}

inline Matrix hamiltonian(const ProbeAncillaModel& m) {
    return detail::two_qubit_hamiltonian(m.omega_p, m.omega_a, m.kappa);
}

inline Matrix hamiltonian(const TwoQubitModel& m) {
    return detail::two_qubit_hamiltonian(m.omega0, m.omega0, m.kappa);
}

inline Matrix hamiltonian(const Model& m) {
    return std::visit([](const auto& x) { return hamiltonian(x); }, m);
}

// --------------------------- system-bath couplings -------------------------

// Couplings with equal bath_index share one reservoir and produce cross dissipators.
struct Coupling {
    Matrix op;
    BathSpec bath;
    int bath_index{0};
};

inline std::vector<Coupling> coupling_operators(const DirectProbeModel& m) {
    return {Coupling{qmat::sigma_z(), m.bath, 0}};
}

inline std::vector<Coupling> coupling_operators(const ProbeAncillaModel& m) {
    return {Coupling{qmat::kron(qmat::identity(2), qmat::sigma_z()), m.bath, 0}};
}

inline std::vector<Coupling> coupling_operators(const TwoQubitModel& m) {
    const Matrix z1 = qmat::kron(qmat::sigma_z(), qmat::identity(2));
    const Matrix z2 = qmat::kron(qmat::identity(2), qmat::sigma_z());
    const int second = m.topology == BathTopology::Common ? 0 : 1;
    return {Coupling{z1, m.bath1, 0}, Coupling{z2, m.bath2, second}};
}

inline std::vector<Coupling> coupling_operators(const Model& m) {
    return std::visit([](const auto& x) { return coupling_operators(x); }, m);
}

// --------------------------- initial states --------------------------------

inline DensityMatrix initial_state(const DirectProbeModel&) {
    Vector plus(2);
    plus << 1.0, 1.0;
    return DensityMatrix::pure(plus / std::sqrt(2.0));
}

// |1>_P (cos(theta/2)|0>_A + sin(theta/2)|1>_A)
inline DensityMatrix initial_state(const ProbeAncillaModel& m) {
    Vector probe(2), ancilla(2);
    probe << 0.0, 1.0;
    ancilla << std::cos(m.theta / 2), std::sin(m.theta / 2);
    return DensityMatrix::pure(qmat::kron_ket(probe, ancilla));
}

// cos(theta/2)|01> + sin(theta/2)|10>
inline DensityMatrix initial_state(const TwoQubitModel& m) {
    Vector psi = Vector::Zero(4);
    psi(1) = std::cos(m.theta / 2);
    psi(2) = std::sin(m.theta / 2);
    return DensityMatrix::pure(psi);
}

inline DensityMatrix initial_state(const Model& m) {
    return std::visit([](const auto& x) { return initial_state(x); }, m);
}

// --------------------------- temperature re-parametrization ----------------

inline DirectProbeModel with_temperature(DirectProbeModel m, double T) {
    m.bath.temperature = T;
    return m;
}

inline ProbeAncillaModel with_temperature(ProbeAncillaModel m, double T) {
    m.bath.temperature = T;
    return m;
}

inline TwoQubitModel with_temperature(TwoQubitModel m, double T) {
    m.bath1.temperature = T;
    m.bath2.temperature = T;
    return m;
}

inline Model with_temperature(const Model& m, double T) {
    return std::visit([T](const auto& x) -> Model { return with_temperature(x, T); }, m);
}

inline double temperature(const Model& m) {
    return std::visit(
        [](const auto& x) {
            if constexpr (std::is_same_v<std::decay_t<decltype(x)>, TwoQubitModel>)
                return x.bath1.temperature;
            else
                return x.bath.temperature;
        },
        m);
}

}  // namespace qthermo::models
