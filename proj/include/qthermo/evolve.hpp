// evolve.hpp — exact propagation under a time-independent Liouvillian, trajectories
// with optional probe reduction, and steady states.

#pragma once

#include <Eigen/SVD>

#include <cmath>
#include <optional>
#include <sstream>
#include <vector>

#include "qthermo/errors.hpp"
#include "qthermo/gme.hpp"
#include "qthermo/qmat.hpp"

namespace qthermo::evolve {

using gme::Liouvillian;

inline constexpr double kPositivityTolerance = 1e-8;
inline constexpr double kTraceDriftTolerance = 1e-9;

struct Trajectory {
    std::vector<double> times;
    std::vector<DensityMatrix> states;
    std::vector<DensityMatrix> reduced;  // empty unless requested
};

namespace detail {

// Unvectorize, re-Hermitize, remove roundoff-level trace drift and assert positivity
// (never clip). Larger trace errors point at the generator and are reported.
inline DensityMatrix to_state(const Vector& v, Eigen::Index dim) {
    Matrix rho = qmat::hermitize(qmat::unvec(v, dim));
    if (!qmat::all_finite(rho))
        throw Error(ErrorKind::NonFinite, "propagated state has non-finite entries");
    const double tr = rho.trace().real();
    if (std::abs(tr - 1.0) > kTraceDriftTolerance) {
        std::ostringstream os;
        os << "propagated state has trace " << tr;
        throw Error(ErrorKind::InvariantViolation, os.str());
    }
    rho /= tr;
    const double lmin = qmat::min_eigenvalue(rho);
    if (lmin < -kPositivityTolerance) {
        std::ostringstream os;
        os << "propagated state has eigenvalue " << lmin;
        throw Error(ErrorKind::PositivityViolation, os.str());
    }
    return DensityMatrix::unchecked(std::move(rho));
}

inline void check_dims(const Liouvillian& L, const DensityMatrix& rho0) {
    if (rho0.dim() != L.dim)
        throw Error(ErrorKind::BadDimension, "state and Liouvillian dimensions differ");
}

inline DensityMatrix reduce_probe(const DensityMatrix& rho) {
    return DensityMatrix::unchecked(qmat::partial_trace(rho.mat(), 1));
}

}  // namespace detail

inline DensityMatrix propagate(const Liouvillian& L, const DensityMatrix& rho0, double t) {
    if (!(t >= 0.0))
        throw Error(ErrorKind::ValidationError, "propagation time must be >= 0");
    detail::check_dims(L, rho0);
    if (t == 0.0) return rho0;
    const Matrix P = qmat::expm(L.superop * t);
    return detail::to_state(P * qmat::vec(rho0.mat()), L.dim);
}

// Uniform grid {0, dt, ..., t_max}; the one-step propagator is applied repeatedly.
inline Trajectory trajectory(const Liouvillian& L, const DensityMatrix& rho0, double t_max,
                             int n_points, bool reduce) {
    if (!(t_max > 0.0))
        throw Error(ErrorKind::ValidationError, "t_max must be > 0");
    if (n_points < 2)
        throw Error(ErrorKind::ValidationError, "n_points must be >= 2");
    if (reduce && L.dim != 4)
        throw Error(ErrorKind::BadDimension, "probe reduction needs a two-qubit state");
    detail::check_dims(L, rho0);

    const double dt = t_max / static_cast<double>(n_points - 1);
    const Matrix step = qmat::expm(L.superop * dt);
    Trajectory tr;
    tr.times.reserve(n_points);
    tr.states.reserve(n_points);
    Vector v = qmat::vec(rho0.mat());
    for (int k = 0; k < n_points; ++k) {
        if (k > 0) v = step * v;
        tr.times.push_back(k == n_points - 1 ? t_max : dt * k);
        tr.states.push_back(k == 0 ? rho0 : detail::to_state(v, L.dim));
        if (reduce) tr.reduced.push_back(detail::reduce_probe(tr.states.back()));
    }
    return tr;
}

// Arbitrary ascending grid, one exponential per sample.
inline Trajectory trajectory_at(const Liouvillian& L, const DensityMatrix& rho0,
                                const std::vector<double>& times, bool reduce) {
    if (times.empty() || times.front() != 0.0)
        throw Error(ErrorKind::ValidationError, "time grid must start at 0");
    for (std::size_t k = 1; k < times.size(); ++k)
        if (!(times[k] > times[k - 1]))
            throw Error(ErrorKind::ValidationError, "time grid must be strictly increasing");
    if (reduce && L.dim != 4)
        throw Error(ErrorKind::BadDimension, "probe reduction needs a two-qubit state");
    Trajectory tr;
    tr.times = times;
    for (double t : times) {
        tr.states.push_back(propagate(L, rho0, t));
        if (reduce) tr.reduced.push_back(detail::reduce_probe(tr.states.back()));
    }
    return tr;
}

// --------------------------- steady states ---------------------------------

enum class SteadyMethod { NullSpace, Dynamical };

struct SteadyState {
    DensityMatrix rho;
    SteadyMethod method;
    double residual;      // max |L[rho]|
    double time{0.0};     // evolution time used by the dynamical route
};

inline constexpr double kSteadyResidual = 1e-10;
inline constexpr double kSteadyAcceptResidual = 1e-8;
inline constexpr double kSteadyMaxTime = 1e5;

inline double residual(const Liouvillian& L, const Matrix& rho) {
    return qmat::max_abs(L.apply(rho));
}

inline int null_space_dimension(const Liouvillian& L, double rel_tol = 1e-10) {
    Eigen::JacobiSVD<Matrix> svd(L.superop);
    const auto& s = svd.singularValues();
    const double scale = std::max(1.0, s(0));
    int count = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) <= rel_tol * scale) ++count;
    return count;
}

// A unique stationary state is taken from the null space of L. Otherwise (the
// two-qubit models conserve excitation-number sectors) the initial state is evolved
// until the residual drops below 1e-10.
inline SteadyState steady_state(const Liouvillian& L, const DensityMatrix& initial) {
    detail::check_dims(L, initial);
    if (null_space_dimension(L) == 1) {
        Eigen::JacobiSVD<Matrix> svd(L.superop, Eigen::ComputeFullV);
        const Vector v = svd.matrixV().col(L.superop.cols() - 1);
        Matrix rho = qmat::unvec(v, L.dim);
        rho /= rho.trace();
        rho = qmat::hermitize(rho);
        const double r = residual(L, rho);
        if (r < kSteadyResidual)
            return {DensityMatrix::checked(rho, {1e-10, 1e-10, kPositivityTolerance}),
                    SteadyMethod::NullSpace, r, 0.0};
    }

    double t = 100.0;
    double r = 0.0;
    while (true) {
        const DensityMatrix rho = propagate(L, initial, t);
        r = residual(L, rho.mat());
        if (r < kSteadyResidual || (t >= kSteadyMaxTime && r <= kSteadyAcceptResidual))
            return {rho, SteadyMethod::Dynamical, r, t};
        if (t >= kSteadyMaxTime) break;
        t = std::min(2.0 * t, kSteadyMaxTime);
    }
    std::ostringstream os;
    os << "no stationary state reached: residual " << r << " at t = " << kSteadyMaxTime;
    throw Error(ErrorKind::NoConvergence, os.str());
}

}  // namespace qthermo::evolve
