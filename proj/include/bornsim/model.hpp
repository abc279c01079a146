#pragma once

#include "bornsim/operators.hpp"

namespace bornsim {

enum class CouplingKind { JC, Rabi };

/// Physical constants of one dot+resonator measurement component (hbar = 1).
struct ModelParams {
    double omega0 = 1.0;   // photon energy
    double E_e = 0.0;      // excited dot level
    double E_g = -1.0;     // ground dot level
    double lambda = 0.01;  // electron-photon coupling
    double kappa = 0.001;  // photon loss rate
    double nbar = 0.0;     // reservoir occupancy, 0 = zero temperature
    CouplingKind coupling = CouplingKind::JC;
    FockCutoff cutoff{};

    /// Throws InvalidArgument unless omega0 > 0, lambda, kappa, nbar >= 0
    /// and n_max >= 0.
    void validate() const;

    /// omega0 + E_g - E_e; zero at resonance.
    double detuning() const { return omega0 + E_g - E_e; }
    int dim() const { return cutoff.component_dim(); }
};

/// Born weights of the two dots; weight_r = 1 - weight_l.
class BornState {
public:
    explicit BornState(double weight_l);

    double weight_l() const noexcept { return weight_l_; }
    double weight_r() const noexcept { return 1.0 - weight_l_; }

private:
    double weight_l_;
};

enum class Side { Left, Right };

/// JC dressed doublet of excitation number n together with the n = 1
/// quantities the currents are expressed in.
struct DressedBasis {
    int n = 1;
    double theta = 0.0;      // mixing angle of manifold n, in [0, pi]
    double E_n_plus = 0.0;   // eigenvalues of manifold n
    double E_n_minus = 0.0;
    double E_ground = 0.0;   // effective ground |0,g>, equal to E_g
    double Lambda = 0.0;     // E_{1,+} - E_{1,-}
    double E_plus_trans = 0.0;   // E_{1,+} - E_g
    double E_minus_trans = 0.0;  // E_{1,-} - E_g

    double cos_half() const;
    double sin_half() const;
};

/// Closed-form JC eigenvalue E_{n,+} (sign = +1) or E_{n,-} (sign = -1).
double jc_eigenvalue(const ModelParams& params, int n, int sign);

/// Mixing angle with tan(theta_n) = 2 lambda sqrt(n) / detuning, sin >= 0.
double mixing_angle(const ModelParams& params, int n);

OperatorMatrix jc_hamiltonian(const ModelParams& params);
OperatorMatrix rabi_hamiltonian(const ModelParams& params);
/// Dispatches on params.coupling.
OperatorMatrix hamiltonian(const ModelParams& params);

/// I (x) a on the component space.
OperatorMatrix photon_annihilation(FockCutoff cutoff);
/// I (x) a^dagger a on the component space.
OperatorMatrix photon_number_op(FockCutoff cutoff);
/// a^dagger a + |e><e|.
OperatorMatrix excitation_op(FockCutoff cutoff);
/// (-1)^(a^dagger a + |e><e|).
OperatorMatrix parity_op(FockCutoff cutoff);

DressedBasis dressed_basis(const ModelParams& params, int n = 1);

/// |psi_{n,+}> (sign = +1) or |psi_{n,-}> (sign = -1) in the component basis.
StateVector dressed_state(const ModelParams& params, int n, int sign);
/// |n, dot> in the component basis.
StateVector fock_state(FockCutoff cutoff, DotState dot, int n);

/// Thermal photon populations for occupancy nbar, truncated at n_max and
/// renormalized. Throws InvalidArgument when the discarded tail exceeds 1e-10.
Eigen::VectorXd thermal_populations(double nbar, FockCutoff cutoff);

/// Reduced initial state of one component: weight |0,e><0,e| + (1-weight)
/// |0,g><0,g|, or the dot mixture times a thermal photon state when nbar > 0.
DensityMatrix initial_state(const BornState& born, Side side, const ModelParams& params);
DensityMatrix initial_state(double weight, const ModelParams& params);

}  // namespace bornsim
