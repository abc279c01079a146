#pragma once

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/SparseCore>

#include "bornsim/errors.hpp"
#include "bornsim/model.hpp"

namespace bornsim {

/// Fixed-step grid t_k = k * dt, k = 0..steps(). Observables are recorded
/// every `record_stride` steps (and always at the last step).
struct TimeGrid {
    double t_max = 1.0;
    double dt = 0.01;
    long record_stride = 1;

    void validate() const;
    long steps() const;
};

/// dt * |H| must not exceed this for the fixed-step integrator.
inline constexpr double kStabilityBound = 0.05;
/// Largest |Tr rho - 1| tolerated during integration.
inline constexpr double kTraceDriftLimit = 1e-6;
inline constexpr double kHermiticityDriftLimit = 1e-10;

class StabilityError : public InvalidArgument {
public:
    StabilityError(const std::string& what, double suggested_dt)
        : InvalidArgument(what), suggested_dt_(suggested_dt) {}
    double suggested_dt() const noexcept { return suggested_dt_; }

private:
    double suggested_dt_;
};

/// Frame the Hamiltonian part is integrated in. CoRotating subtracts
/// omega0 * (a^dagger a + |e><e|), which commutes with the JC Hamiltonian and
/// with both dissipators, and then centres the spectrum on zero; every
/// observable that is block diagonal in the excitation number is unchanged.
enum class Frame { Lab, CoRotating };

/// Right-hand side of the photon-loss master equation
///   d rho/dt = -i[H, rho] + kappa(1+nbar) D[a] rho + kappa nbar D[a^dagger] rho
/// with D[X] rho = X rho X^dagger - {X^dagger X, rho}/2.
class Lindbladian {
public:
    explicit Lindbladian(const ModelParams& params, Frame frame = Frame::Lab);

    /// out = L(rho). The Hamiltonian part is evaluated as -i(K - K^dagger)
    /// with K = H_eff rho, so the result is Hermitian by construction.
    void apply(const OperatorMatrix& rho, OperatorMatrix& out) const;
    OperatorMatrix operator()(const OperatorMatrix& rho) const;

    /// The generator acting on row-major vec(rho), index i * dim + j.
    Eigen::SparseMatrix<Complex, Eigen::RowMajor> superoperator() const;

    int dim() const noexcept { return dim_; }
    Frame frame() const noexcept { return frame_; }
    /// Largest |eigenvalue| of the Hamiltonian actually integrated.
    double generator_norm() const noexcept { return generator_norm_; }

private:
    using Sparse = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;

    int dim_;
    Frame frame_;
    double generator_norm_;
    double rate_down_;
    double rate_up_;
    Sparse h_eff_;
    Sparse a_;
    Sparse a_dag_;
    mutable OperatorMatrix work_;
    mutable OperatorMatrix work2_;
    mutable OperatorMatrix herm_;
};

/// Lab-frame d rho/dt. Throws DimensionMismatch when rho does not match params.
OperatorMatrix lindblad_rhs(const DensityMatrix& rho, const ModelParams& params);

/// Frame used by evolve(): CoRotating for JC, Lab for Rabi.
Frame natural_frame(const ModelParams& params);

/// min(0.01, 0.05 / |H|) for the Hamiltonian evolve() integrates.
double default_time_step(const ModelParams& params);

/// Time series of one component's observables. Cumulative integrals are
/// trapezoid sums over every integration step, not only recorded ones.
struct Trajectory {
    double dt = 0.0;          // integration step
    long record_stride = 1;
    double kappa = 0.0;
    double nbar = 0.0;
    bool has_dressed = false; // JC with n_max >= 1

    std::vector<double> times;
    std::vector<double> photon_number;     // Tr(rho a^dagger a)
    std::vector<double> manifold_photons;  // <1,g|rho|1,g>
    std::vector<double> p_plus;
    std::vector<double> p_minus;
    std::vector<double> p_zero;            // <0,g|rho|0,g>
    std::vector<Complex> p_pm;
    std::vector<double> energy;            // Tr(rho H), lab frame
    std::vector<double> trace_error;

    std::vector<double> photon_integral;    // int_0^t <a^dagger a>
    std::vector<double> p_zero_integral;    // int_0^t P0
    std::vector<double> manifold_integral;  // int_0^t <1,g|rho|1,g>

    double max_hermiticity_drift = 0.0;
    OperatorMatrix final_state;

    std::size_t size() const { return times.size(); }
    double record_interval() const { return dt * static_cast<double>(record_stride); }
};

struct EvolveOptions {
    std::optional<Frame> frame;  // default: natural_frame(params)
    /// Called at every recorded time with the (integration frame) state.
    std::function<void(double, const OperatorMatrix&)> observer;
};

/// Classical fixed-step RK4 integration of rho0 over `grid`.
/// Throws StabilityError when dt * |H| > 0.05 and InvariantViolation when the
/// trace drifts by more than 1e-6 or Hermiticity by more than 1e-10.
Trajectory evolve(const DensityMatrix& rho0, const ModelParams& params, const TimeGrid& grid,
                  const EvolveOptions& options = {});

enum class SteadyCriterion { Residual, Horizon };

struct SteadyStateResult {
    DensityMatrix rho = DensityMatrix::unchecked(OperatorMatrix::Identity(1, 1));
    SteadyCriterion criterion = SteadyCriterion::Horizon;
    double residual = 0.0;  // Frobenius norm of d rho/dt at the end
    double time = 0.0;
    bool flagged = false;   // horizon reached with residual > 1e-6
};

struct SteadyStateOptions {
    double residual_tol = 1e-9;
    double horizon_rates = 50.0;  // stop at t = horizon_rates / kappa
    double flag_residual = 1e-6;
    std::optional<double> dt;
    long check_every = 100;
};

/// Integrates until |d rho/dt| < residual_tol or t = 50/kappa. Requires kappa > 0.
SteadyStateResult steady_state(const ModelParams& params, const DensityMatrix& rho0,
                               const SteadyStateOptions& options = {});

}  // namespace bornsim
