#pragma once

// Truncated Fock-space and two-level operator algebra.
//
// Basis ordering for one dot+resonator component is dot-state-major:
//   index = dot_index * (n_max + 1) + photon_index
// with dot_index 0 = |g>, 1 = |e>.

#include <complex>
#include <cstddef>

#include <Eigen/Dense>

namespace bornsim {

using Complex = std::complex<double>;
using OperatorMatrix = Eigen::MatrixXcd;
using StateVector = Eigen::VectorXcd;

/// Largest operator dimension tensor_product will build.
inline constexpr std::size_t kMaxDimension = 4096;

enum class DotState : int { Ground = 0, Excited = 1 };

/// Highest retained photon number of one resonator.
struct FockCutoff {
    int n_max = 2;

    int photon_dim() const { return n_max + 1; }
    int component_dim() const { return 2 * (n_max + 1); }
};

/// Index of |n, dot> in the dot-major component basis.
inline int basis_index(FockCutoff cutoff, DotState dot, int n) {
    return static_cast<int>(dot) * cutoff.photon_dim() + n;
}

OperatorMatrix identity(int dim);

/// Bosonic lowering operator on photon numbers 0..n_max: a[n-1, n] = sqrt(n).
OperatorMatrix annihilation_op(FockCutoff cutoff);

/// a^dagger a on photon numbers 0..n_max.
OperatorMatrix number_op(FockCutoff cutoff);

/// Two-level operators in the (g, e) ordering.
OperatorMatrix sigma_raise();   // |e><g|
OperatorMatrix sigma_lower();   // |g><e|
OperatorMatrix sigma_x();
OperatorMatrix sigma_z();       // |e><e| - |g><g|
OperatorMatrix projector_excited();
OperatorMatrix projector_ground();

/// Kronecker product; throws InvalidArgument when the result would exceed
/// `max_dim`.
OperatorMatrix tensor_product(const OperatorMatrix& a, const OperatorMatrix& b,
                              std::size_t max_dim = kMaxDimension);

OperatorMatrix commutator(const OperatorMatrix& a, const OperatorMatrix& b);

bool is_hermitian(const OperatorMatrix& m, double tol = 1e-12);

/// Largest |eigenvalue| of a Hermitian matrix.
double spectral_radius_hermitian(const OperatorMatrix& m);

/// Hermitian, unit-trace, positive semidefinite matrix.
class DensityMatrix {
public:
    static constexpr double kHermitianTol = 1e-10;
    static constexpr double kTraceTol = 1e-8;
    static constexpr double kPositivityTol = 1e-8;

    /// Validates `op` and throws InvalidArgument/NormalizationError on failure.
    explicit DensityMatrix(OperatorMatrix op);

    const OperatorMatrix& op() const noexcept { return op_; }
    int dim() const noexcept { return static_cast<int>(op_.rows()); }
    double trace() const { return op_.trace().real(); }

    /// Tr(rho O) for a Hermitian observable, real part.
    double expectation(const OperatorMatrix& observable) const;

    double min_eigenvalue() const;

    /// Skip validation; for internal use on states that already satisfy the
    /// invariants up to integration error.
    static DensityMatrix unchecked(OperatorMatrix op);

private:
    struct Unchecked {};
    DensityMatrix(OperatorMatrix op, Unchecked) : op_(std::move(op)) {}

    OperatorMatrix op_;
};

/// |psi><psi|. Throws NormalizationError when | |psi| - 1 | > 1e-8.
DensityMatrix pure_density(const StateVector& amplitudes);

}  // namespace bornsim
