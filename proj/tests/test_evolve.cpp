#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "qthermo/analytic.hpp"
#include "qthermo/evolve.hpp"

using namespace qthermo;
using namespace qthermo::evolve;
using qmat::max_abs;

namespace {

models::ProbeAncillaModel default_probe_ancilla() {
    models::ProbeAncillaModel m;
    m.kappa = 0.8;
    m.bath = {0.01, 10.0, 0.4};
    m.theta = std::numbers::pi / 2;
    return m;
}

models::TwoQubitModel default_two_qubit(models::BathTopology topo, double theta) {
    models::TwoQubitModel m;
    m.kappa = 0.6;
    m.topology = topo;
    m.bath1 = {0.01, 10.0, 0.4};
    m.bath2 = {0.05, 10.0, 0.4};
    m.theta = theta;
    return m;
}

}  // namespace

TEST(Propagate, TimeZeroIsExact) {
    const auto m = default_probe_ancilla();
    const auto L = gme::build_liouvillian(m);
    const DensityMatrix rho0 = models::initial_state(m);
    EXPECT_EQ(max_abs(propagate(L, rho0, 0.0).mat() - rho0.mat()), 0.0);
    EXPECT_THROW(propagate(L, rho0, -1.0), Error);
}

TEST(Propagate, EigenstateIsStationaryWithoutDissipation) {
    auto m = default_probe_ancilla();
    m.bath.eta = 0.0;
    m.theta = std::numbers::pi;  // |11>, an eigenstate of H
    const auto L = gme::build_liouvillian(m);
    const DensityMatrix rho0 = models::initial_state(m);
    for (double t : {0.3, 7.0, 120.0})
        EXPECT_LT(max_abs(propagate(L, rho0, t).mat() - rho0.mat()), 1e-12);
}

TEST(Propagate, ProbeCoherenceMatchesClosedFormAtTimeOne) {
    const auto m = default_probe_ancilla();
    const auto L = gme::build_liouvillian(m);
    const Matrix probe = qmat::partial_trace(propagate(L, models::initial_state(m), 1.0).mat(), 1);
    const auto f = analytic::probe_closed_form(1.0, m.kappa, m.bath);
    EXPECT_LT(std::abs(probe(0, 1) - f.X), 1e-6);
}

TEST(Propagate, OhmicZeroChannelAddsPureDephasingOfTheProbeCoherence) {
    // With the w = 0 channel kept, the |sector><11| coherences pick up an extra
    // decay pi eta T, so the probe coherence no longer follows the closed form.
    const auto m = default_probe_ancilla();
    const auto L = gme::build_liouvillian(m, gme::Options{gme::ZeroFrequencyRate::OhmicLimit});
    const Matrix probe = qmat::partial_trace(propagate(L, models::initial_state(m), 1.0).mat(), 1);
    const auto f = analytic::probe_closed_form(1.0, m.kappa, m.bath);
    const double extra = std::numbers::pi * m.bath.eta * m.bath.temperature;
    EXPECT_GT(std::abs(probe(0, 1) - f.X), 1e-3);
    EXPECT_LT(std::abs(probe(0, 1) - f.X * std::exp(-extra)), 1e-12);
}

TEST(Propagate, SemigroupProperty) {
    for (auto z : {gme::ZeroFrequencyRate::OhmicLimit, gme::ZeroFrequencyRate::Drop}) {
        const auto m = default_two_qubit(models::BathTopology::Common, 1.0);
        const auto L = gme::build_liouvillian(m, gme::Options{z});
        const DensityMatrix rho0 = models::initial_state(m);
        for (auto [s, t] : {std::pair{0.5, 1.5}, std::pair{10.0, 33.0}, std::pair{100.0, 250.0}}) {
            const Matrix direct = propagate(L, rho0, s + t).mat();
            const Matrix split = propagate(L, propagate(L, rho0, s), t).mat();
            EXPECT_LT(max_abs(direct - split), 1e-9);
        }
    }
}

TEST(Trajectory, TwoPointsAndGrid) {
    const auto m = default_probe_ancilla();
    const auto L = gme::build_liouvillian(m);
    const auto tr = trajectory(L, models::initial_state(m), 5.0, 2, true);
    ASSERT_EQ(tr.times.size(), 2u);
    EXPECT_EQ(tr.times[0], 0.0);
    EXPECT_EQ(tr.times[1], 5.0);
    EXPECT_EQ(tr.reduced.size(), 2u);
    EXPECT_THROW(trajectory(L, models::initial_state(m), 0.0, 10, false), Error);
    EXPECT_THROW(trajectory(L, models::initial_state(m), 1.0, 1, false), Error);
}

TEST(Trajectory, StepPowersAgreeWithPerTimeExponentials) {
    const auto m = default_probe_ancilla();
    const auto L = gme::build_liouvillian(m);
    const auto rho0 = models::initial_state(m);
    const auto tr = trajectory(L, rho0, 50.0, 501, false);
    const auto exact = trajectory_at(L, rho0, tr.times, false);
    for (std::size_t k = 0; k < tr.times.size(); ++k)
        EXPECT_LT(max_abs(tr.states[k].mat() - exact.states[k].mat()), 1e-10) << "t = " << tr.times[k];
}

TEST(Trajectory, StatesStayPhysical) {
    for (auto topo : {models::BathTopology::Local, models::BathTopology::Common}) {
        const auto m = default_two_qubit(topo, 0.7);
        const auto L = gme::build_liouvillian(m, gme::Options{gme::ZeroFrequencyRate::OhmicLimit});
        const auto tr = trajectory(L, models::initial_state(m), 200.0, 401, true);
        for (std::size_t k = 0; k < tr.states.size(); ++k) {
            const Matrix& rho = tr.states[k].mat();
            EXPECT_LT(std::abs(rho.trace() - 1.0), 1e-10);
            EXPECT_LT(qmat::hermiticity_error(rho), 1e-12);
            EXPECT_GE(qmat::min_eigenvalue(rho), -1e-10);
            EXPECT_LT(std::abs(tr.reduced[k].mat().trace() - 1.0), 1e-10);
        }
    }
}

TEST(Trajectory, ExcitationSectorIsConserved) {
    for (auto topo : {models::BathTopology::Local, models::BathTopology::Common}) {
        for (double theta : {0.0, 1.1, std::numbers::pi / 2}) {
            const auto m = default_two_qubit(topo, theta);
            const auto L = gme::build_liouvillian(m, gme::Options{gme::ZeroFrequencyRate::OhmicLimit});
            const auto tr = trajectory(L, models::initial_state(m), 500.0, 201, false);
            for (const auto& s : tr.states) {
                EXPECT_LT(std::abs(s.mat()(0, 0)), 1e-10);
                EXPECT_LT(std::abs(s.mat()(3, 3)), 1e-10);
            }
        }
    }
}

TEST(Trajectory, LocalBathsConverge) {
    const auto m = default_two_qubit(models::BathTopology::Local, 0.0);
    const auto L = gme::build_liouvillian(m);
    const auto tr = trajectory(L, models::initial_state(m), 1e3, 1001, false);
    const auto n = tr.states.size();
    EXPECT_LT(max_abs(tr.states[n - 1].mat() - tr.states[n - 2].mat()), 1e-8);
}

TEST(SteadyState, DirectProbeDephasesToMaximallyMixed) {
    const models::DirectProbeModel m{1.0, {0.01, 10.0, 0.4}};
    const auto L = gme::build_liouvillian(m);
    const auto ss = steady_state(L, models::initial_state(m));
    EXPECT_EQ(ss.method, SteadyMethod::Dynamical);
    EXPECT_LT(max_abs(ss.rho.mat() - 0.5 * qmat::identity(2)), 1e-10);
}

TEST(SteadyState, TwoQubitThermalizesToClosedForm) {
    const DensityMatrix expected = analytic::steady_two_qubit(0.6, 0.4);
    for (auto topo : {models::BathTopology::Local, models::BathTopology::Common}) {
        for (double theta : {0.0, std::numbers::pi / 2}) {
            const auto m = default_two_qubit(topo, theta);
            const auto ss = steady_state(gme::build_liouvillian(m), models::initial_state(m));
            EXPECT_EQ(ss.method, SteadyMethod::Dynamical);
            EXPECT_LT(max_abs(ss.rho.mat() - expected.mat()), 1e-6);
        }
    }
}

TEST(SteadyState, UniqueNullSpaceGivesGibbsState) {
    // sigma_x coupling on a bare qubit: emission/absorption at w = +-1, unique Gibbs state
    const Matrix H = 0.5 * qmat::sigma_z();
    const models::BathSpec b{0.05, 10.0, 0.7};
    const auto L = gme::build_liouvillian(H, {models::Coupling{qmat::sigma_x(), b, 0}},
                                          gme::ZeroFrequencyRate::OhmicLimit);
    const auto ss = steady_state(L, DensityMatrix::checked(0.5 * qmat::identity(2)));
    EXPECT_EQ(ss.method, SteadyMethod::NullSpace);
    Matrix gibbs = qmat::expm(-H / 0.7);
    gibbs /= gibbs.trace();
    EXPECT_LT(max_abs(ss.rho.mat() - gibbs), 1e-10);
    EXPECT_LT(ss.residual, 1e-10);
}

TEST(SteadyState, UnitaryDynamicsNeverConverge) {
    auto m = default_two_qubit(models::BathTopology::Local, 0.0);
    m.bath1.eta = 0.0;
    m.bath2.eta = 0.0;
    try {
        steady_state(gme::build_liouvillian(m), models::initial_state(m));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NoConvergence);
    }
}
