#pragma once

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "bornsim/operators.hpp"

namespace testsupport {

using bornsim::Complex;
using bornsim::OperatorMatrix;

inline double max_abs(const OperatorMatrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

/// Random density matrix of rank <= dim: G G^dagger / Tr with Gaussian G.
inline OperatorMatrix random_density(std::mt19937& rng, int dim, int rank = -1) {
    std::normal_distribution<double> g;
    if (rank < 0) rank = dim;
    OperatorMatrix m(dim, rank);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < rank; ++j) m(i, j) = Complex(g(rng), g(rng));
    OperatorMatrix rho = m * m.adjoint();
    rho /= rho.trace().real();
    return 0.5 * (rho + rho.adjoint());
}

inline OperatorMatrix random_matrix(std::mt19937& rng, int rows, int cols) {
    std::uniform_int_distribution<int> small(-3, 3);
    OperatorMatrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = Complex(small(rng), small(rng));
    return m;
}

inline bornsim::StateVector random_unit_vector(std::mt19937& rng, int dim) {
    std::normal_distribution<double> g;
    bornsim::StateVector v(dim);
    for (int i = 0; i < dim; ++i) v[i] = Complex(g(rng), g(rng));
    return v / v.norm();
}

/// Uhlmann fidelity (Tr sqrt(sqrt(a) b sqrt(a)))^2.
inline double fidelity(const OperatorMatrix& a, const OperatorMatrix& b) {
    Eigen::SelfAdjointEigenSolver<OperatorMatrix> ea(a);
    const Eigen::VectorXd ev = ea.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const OperatorMatrix root = ea.eigenvectors() * ev.asDiagonal() * ea.eigenvectors().adjoint();
    const OperatorMatrix m = root * b * root;
    Eigen::SelfAdjointEigenSolver<OperatorMatrix> em(0.5 * (m + m.adjoint()));
    const double tr = em.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
    return tr * tr;
}

}  // namespace testsupport
