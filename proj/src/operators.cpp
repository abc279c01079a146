#include "bornsim/operators.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "bornsim/errors.hpp"

namespace bornsim {

OperatorMatrix identity(int dim) {
    if (dim < 1) throw InvalidArgument("identity: dimension must be positive");
    return OperatorMatrix::Identity(dim, dim);
}

OperatorMatrix annihilation_op(FockCutoff cutoff) {
    if (cutoff.n_max < 0) throw InvalidArgument("annihilation_op: n_max must be >= 0");
    const int d = cutoff.photon_dim();
    OperatorMatrix a = OperatorMatrix::Zero(d, d);
    for (int n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

OperatorMatrix number_op(FockCutoff cutoff) {
    if (cutoff.n_max < 0) throw InvalidArgument("number_op: n_max must be >= 0");
    const int d = cutoff.photon_dim();
    OperatorMatrix n = OperatorMatrix::Zero(d, d);
    for (int k = 0; k < d; ++k) n(k, k) = k;
    return n;
}

OperatorMatrix sigma_raise() {
    OperatorMatrix s = OperatorMatrix::Zero(2, 2);
    s(1, 0) = 1.0;
    return s;
}

OperatorMatrix sigma_lower() {
    OperatorMatrix s = OperatorMatrix::Zero(2, 2);
    s(0, 1) = 1.0;
    return s;
}

OperatorMatrix sigma_x() { return sigma_raise() + sigma_lower(); }

OperatorMatrix sigma_z() { return projector_excited() - projector_ground(); }

OperatorMatrix projector_excited() {
    OperatorMatrix p = OperatorMatrix::Zero(2, 2);
    p(1, 1) = 1.0;
    return p;
}

OperatorMatrix projector_ground() {
    OperatorMatrix p = OperatorMatrix::Zero(2, 2);
    p(0, 0) = 1.0;
    return p;
}

OperatorMatrix tensor_product(const OperatorMatrix& a, const OperatorMatrix& b,
                              std::size_t max_dim) {
    if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() == 0 || b.rows() == 0) {
        throw InvalidArgument("tensor_product: operands must be non-empty square matrices");
    }
    const auto da = static_cast<std::size_t>(a.rows());
    const auto db = static_cast<std::size_t>(b.rows());
    if (da > max_dim / db) {
        std::ostringstream msg;
        msg << "tensor_product: dimension " << da << "*" << db << " exceeds maximum " << max_dim;
        throw InvalidArgument(msg.str());
    }
    const Eigen::Index n = a.rows() * b.rows();
    OperatorMatrix out(n, n);
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

OperatorMatrix commutator(const OperatorMatrix& a, const OperatorMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionMismatch("commutator: operand dimensions differ");
    }
    return a * b - b * a;
}

bool is_hermitian(const OperatorMatrix& m, double tol) {
    if (m.rows() != m.cols()) return false;
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

double spectral_radius_hermitian(const OperatorMatrix& m) {
    Eigen::SelfAdjointEigenSolver<OperatorMatrix> solver(m, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

DensityMatrix::DensityMatrix(OperatorMatrix op) : op_(std::move(op)) {
    if (op_.rows() == 0 || op_.rows() != op_.cols()) {
        throw InvalidArgument("DensityMatrix: must be a non-empty square matrix");
    }
    if (!is_hermitian(op_, kHermitianTol)) {
        throw InvalidArgument("DensityMatrix: matrix is not Hermitian");
    }
    const double tr = op_.trace().real();
    if (std::abs(tr - 1.0) > kTraceTol) {
        std::ostringstream msg;
        msg << "DensityMatrix: trace " << tr << " differs from 1";
        throw NormalizationError(msg.str(), tr);
    }
    const double lowest = min_eigenvalue();
    if (lowest < -kPositivityTol) {
        std::ostringstream msg;
        msg << "DensityMatrix: negative eigenvalue " << lowest;
        throw InvalidArgument(msg.str());
    }
}

DensityMatrix DensityMatrix::unchecked(OperatorMatrix op) {
    return DensityMatrix(std::move(op), Unchecked{});
}

double DensityMatrix::expectation(const OperatorMatrix& observable) const {
    if (observable.rows() != op_.rows() || observable.cols() != op_.cols()) {
        throw DimensionMismatch("expectation: observable dimension differs from state");
    }
    // Tr(rho O) = sum_ij rho_ij O_ji
    return (op_.cwiseProduct(observable.transpose())).sum().real();
}

double DensityMatrix::min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<OperatorMatrix> solver(op_, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

DensityMatrix pure_density(const StateVector& amplitudes) {
    if (amplitudes.size() == 0) throw InvalidArgument("pure_density: empty vector");
    const double norm = amplitudes.norm();
    if (std::abs(norm - 1.0) > 1e-8) {
        std::ostringstream msg;
        msg << "pure_density: state vector has norm " << norm << ", expected 1";
        throw NormalizationError(msg.str(), norm);
    }
    return DensityMatrix::unchecked(amplitudes * amplitudes.adjoint());
}

}  // namespace bornsim
