// qmat.hpp — dense complex linear algebra for 2-, 4- and 16-dimensional operators:
// Pauli matrices, Kronecker products, Hermitian eigensystems, matrix exponential,
// partial trace and column-stacking vectorization.

#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <sstream>
#include <vector>

#include "qthermo/errors.hpp"

namespace qthermo {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

namespace qmat {

inline constexpr cplx I{0.0, 1.0};

// --------------------------- basic measures --------------------------------

inline double max_abs(const Matrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline double hermiticity_error(const Matrix& m) {
    return max_abs(m - m.adjoint());
}

inline bool all_finite(const Matrix& m) {
    return m.allFinite();
}

inline Matrix identity(Eigen::Index dim) {
    return Matrix::Identity(dim, dim);
}

inline Matrix hermitize(const Matrix& m) {
    return 0.5 * (m + m.adjoint());
}

// --------------------------- Pauli operators -------------------------------

enum class Axis { x, y, z };

inline Matrix pauli(Axis which) {
    Matrix m(2, 2);
    switch (which) {
        case Axis::x: m << 0.0, 1.0, 1.0, 0.0; break;
        case Axis::y: m << 0.0, -I, I, 0.0; break;
        case Axis::z: m << 1.0, 0.0, 0.0, -1.0; break;
    }
    return m;
}

inline Matrix sigma_x() { return pauli(Axis::x); }
inline Matrix sigma_y() { return pauli(Axis::y); }
inline Matrix sigma_z() { return pauli(Axis::z); }

// --------------------------- tensor products -------------------------------

inline Matrix kron(const Matrix& a, const Matrix& b) {
    if (a.rows() != a.cols() || b.rows() != b.cols())
        throw Error(ErrorKind::BadDimension, "kron expects square operands");
    return Eigen::kroneckerProduct(a, b).eval();
}

inline Vector kron_ket(const Vector& a, const Vector& b) {
    return Eigen::kroneckerProduct(a, b).eval();
}

// Computational basis ket |bits> of an n-qubit register, first qubit most significant.
inline Vector basis_ket(Eigen::Index dim, Eigen::Index index) {
    Vector v = Vector::Zero(dim);
    v(index) = 1.0;
    return v;
}

inline Matrix projector(const Vector& ket) {
    return ket * ket.adjoint();
}

// --------------------------- Hermitian eigensystem -------------------------

struct EigenSystem {
    Eigen::VectorXd values;  // ascending
    Matrix vectors;          // orthonormal columns

    Matrix reconstruct() const {
        return vectors * values.cast<cplx>().asDiagonal() * vectors.adjoint();
    }
};

inline constexpr double kHermiticityTolerance = 1e-12;

// Eigen returns eigenvalues ascending. Each eigenvector's phase is fixed so that its
// first component with magnitude above 1e-12 is real and positive, which makes the
// output deterministic for non-degenerate spectra.
inline EigenSystem eig_hermitian(const Matrix& h, double herm_tol = kHermiticityTolerance) {
    if (h.rows() != h.cols())
        throw Error(ErrorKind::BadDimension, "eig_hermitian expects a square matrix");
    if (!all_finite(h))
        throw Error(ErrorKind::NonFinite, "eig_hermitian input has non-finite entries");
    const double herr = hermiticity_error(h);
    if (herr > herm_tol * std::max(1.0, max_abs(h))) {
        std::ostringstream os;
        os << "matrix is not Hermitian (max |h - h^dagger| = " << herr << ")";
        throw Error(ErrorKind::NonHermitianInput, os.str());
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitize(h));
    if (solver.info() != Eigen::Success)
        throw Error(ErrorKind::NoConvergence, "Hermitian eigensolver failed");

    EigenSystem es{solver.eigenvalues(), solver.eigenvectors()};
    for (Eigen::Index c = 0; c < es.vectors.cols(); ++c) {
        for (Eigen::Index r = 0; r < es.vectors.rows(); ++r) {
            const cplx z = es.vectors(r, c);
            if (std::abs(z) > 1e-12) {
                es.vectors.col(c) *= std::conj(z) / std::abs(z);
                break;
            }
        }
    }
    return es;
}

inline double min_eigenvalue(const Matrix& h) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitize(h), Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

// --------------------------- matrix exponential ----------------------------

// Scaling-and-squaring Padé approximant.
inline Matrix expm(const Matrix& m) {
    if (m.rows() != m.cols())
        throw Error(ErrorKind::BadDimension, "expm expects a square matrix");
    if (!all_finite(m))
        throw Error(ErrorKind::NonFinite, "expm input has non-finite entries");
    Matrix out = m.exp();
    if (!all_finite(out))
        throw Error(ErrorKind::NonFinite, "expm overflowed");
    return out;
}

// --------------------------- vectorization ---------------------------------

// Column stacking: vec(A X B) = (B^T kron A) vec(X).
inline Vector vec(const Matrix& m) {
    return Eigen::Map<const Vector>(m.data(), m.size());
}

inline Matrix unvec(const Vector& v, Eigen::Index dim) {
    if (v.size() != dim * dim)
        throw Error(ErrorKind::BadDimension, "unvec size mismatch");
    return Eigen::Map<const Matrix>(v.data(), dim, dim);
}

// --------------------------- partial trace ---------------------------------

// Two-qubit state in the basis {|00>,|01>,|10>,|11>}; keep = 1 traces out the
// second qubit, keep = 2 traces out the first.
inline Matrix partial_trace(const Matrix& rho, int keep) {
    if (rho.rows() != 4 || rho.cols() != 4)
        throw Error(ErrorKind::BadDimension, "partial_trace expects a 4x4 operator");
    if (keep != 1 && keep != 2)
        throw Error(ErrorKind::BadDimension, "partial_trace keep index must be 1 or 2");
    Matrix out = Matrix::Zero(2, 2);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int j = 0; j < 2; ++j)
                out(a, b) += keep == 1 ? rho(2 * a + j, 2 * b + j) : rho(2 * j + a, 2 * j + b);
    return out;
}

}  // namespace qmat

// --------------------------- density matrices ------------------------------

struct StateTolerances {
    double hermiticity = 1e-12;
    double trace = 1e-10;
    double positivity = 1e-10;
};

// Hermitian, unit-trace, positive semidefinite operator. Construct through
// DensityMatrix::checked to enforce the invariants.
class DensityMatrix {
public:
    DensityMatrix() = default;

    static DensityMatrix checked(Matrix m, const StateTolerances& tol = {}) {
        if (!qmat::all_finite(m))
            throw Error(ErrorKind::NonFinite, "density matrix has non-finite entries");
        if (m.rows() != m.cols() || m.rows() == 0)
            throw Error(ErrorKind::BadDimension, "density matrix must be square");
        std::ostringstream os;
        const double herr = qmat::hermiticity_error(m);
        if (herr >= tol.hermiticity) {
            os << "density matrix not Hermitian (" << herr << ")";
            throw Error(ErrorKind::InvariantViolation, os.str());
        }
        const double terr = std::abs(m.trace() - cplx(1.0, 0.0));
        if (terr >= tol.trace) {
            os << "density matrix trace deviates from 1 by " << terr;
            throw Error(ErrorKind::InvariantViolation, os.str());
        }
        const double lmin = qmat::min_eigenvalue(m);
        if (lmin < -tol.positivity) {
            os << "density matrix has negative eigenvalue " << lmin;
            throw Error(ErrorKind::PositivityViolation, os.str());
        }
        return DensityMatrix(std::move(m));
    }

    static DensityMatrix pure(const Vector& ket) {
        return checked(qmat::projector(ket / ket.norm()));
    }

    // For producers that establish the invariants themselves.
    static DensityMatrix unchecked(Matrix m) { return DensityMatrix(std::move(m)); }

    const Matrix& mat() const noexcept { return mat_; }
    Eigen::Index dim() const noexcept { return mat_.rows(); }
    double purity() const { return (mat_ * mat_).trace().real(); }
    double min_eigenvalue() const { return qmat::min_eigenvalue(mat_); }

private:
    explicit DensityMatrix(Matrix m) : mat_(std::move(m)) {}
    Matrix mat_;
};

}  // namespace qthermo
