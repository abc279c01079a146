#pragma once

// Closed-form predictions for the JC and Rabi measurement components. They
// serve as fast predictors and as oracles for the numerical dynamics.

#include <vector>

#include <Eigen/Dense>

#include "bornsim/dynamics.hpp"

namespace bornsim::analytic {

/// Dressed-manifold populations under the secular approximation.
/// Accurate when lambda >> kappa.
struct SecularSolution {
    double p_plus = 0.0;
    double p_minus = 0.0;
    Complex p_pm{0.0, 0.0};
};

SecularSolution secular_solution(const ModelParams& params, double weight, double t);

struct ResonanceForms {
    double photon_number = 0.0;
    double current = 0.0;
};

/// <a^dagger a>(t) = w e^{-kappa t/2} (1 - cos 2 lambda t)/2 and
/// J = kappa (-E_g) times the same. Throws InvalidArgument off resonance.
ResonanceForms resonance_closed_forms(const ModelParams& params, double t, double weight = 1.0);

struct QuasiStepSchedule {
    double period = 0.0;          // T = pi / lambda
    double critical_number = 0.0; // n_c = 2 lambda / kappa
    double critical_time = 0.0;   // t_c = n_c T = 2 pi / kappa
};

QuasiStepSchedule quasi_step_schedule(const ModelParams& params);

struct QuasiStep {
    double measured_probability = 0.0;  // P(nT)
    double energy_fraction = 0.0;       // int_0^{nT} J / (-E_g)
    QuasiStepSchedule schedule;
};

/// Both readings equal 1 - exp(-n pi kappa / (2 lambda)); resonance, n >= 1.
QuasiStep quasi_step_prediction(const ModelParams& params, int n);

/// kappa int_0^t <a^dagger a> from the secular populations.
double secular_measured_probability(const ModelParams& params, double weight, double t);
/// t -> infinity limit of the above.
double secular_measured_probability_limit(const ModelParams& params, double weight);

/// Time by which the slower one-photon channel, rate kappa * min(cos^2, sin^2)(theta_1/2),
/// has decayed by exp(-e_folds). Equals 20/kappa at resonance for the default.
double slow_channel_horizon(const ModelParams& params, double e_folds = 10.0);

/// int_0^t J from the secular populations, with transition energies.
double secular_accumulated_energy(const ModelParams& params, double weight, double t);

/// State on the three lowest JC eigenstates: (P_+, P_-, P_{+-}, P_0).
using ManifoldState = Eigen::Vector4cd;

ManifoldState manifold_initial_state(const ModelParams& params, double weight);

/// Exact (non-secular) eigenbasis equations at nbar = 0:
///   dP_+/dt  = -kappa cos^2(t/2) P_+ + (kappa/2) sin(t) Re P_{+-}
///   dP_-/dt  = -kappa sin^2(t/2) P_- + (kappa/2) sin(t) Re P_{+-}
///   dP_{+-}/dt = -(i Lambda + kappa/2) P_{+-} + (kappa/4) sin(t) (P_+ + P_-)
///   dP_0/dt  = kappa <a^dagger a>
/// Set `secular` to drop the population-coherence couplings.
ManifoldState dressed_exact_rhs(const ManifoldState& state, const ModelParams& params, bool secular = false);

/// Photon number carried by a manifold state.
double manifold_photon_number(const ManifoldState& state, const ModelParams& params);

struct ManifoldTrajectory {
    std::vector<double> times;
    std::vector<ManifoldState> states;
};

/// Integrates dressed_exact_rhs with the same RK4 stepper and grid
/// convention as evolve().
ManifoldTrajectory integrate_dressed_exact(const ModelParams& params, const ManifoldState& initial,
                                           const TimeGrid& grid, bool secular = false);

/// Strong-coupling perturbative quantities of the Rabi model.
struct RabiPerturbation {
    int n = 0;
    double overlap = 0.0;      // D_nn
    double E_plus = 0.0;       // E_{n,+}
    double E_minus = 0.0;      // E_{n,-}
    double steady_photons = 0.0;  // (lambda/omega0)^2
};

/// D_nn = e^{-2x^2} sum_r (-1)^r n! (2x)^{2n-2r} / ((n-r)!^2 r!), x = lambda/omega0.
double coherent_overlap(double ratio, int n);

RabiPerturbation rabi_perturbation(const ModelParams& params, int n);

/// |psi_{n,+}> (sign = +1) or |psi_{n,-}> in the component basis, built from
/// displaced Fock states. The displacement sign paired with each |+->
/// follows the one that diagonalizes lambda (a + a^dagger) sigma_x.
StateVector rabi_perturbative_state(const ModelParams& params, int n, int sign);

/// Equal mixture of |psi_{0,+}> and |psi_{0,-}>.
DensityMatrix rabi_steady_mixture(const ModelParams& params);

/// Rate equations for P_{n,+-}; layout [P_{0,+}, P_{0,-}, P_{1,+}, P_{1,-}, ...]
/// truncated at params.cutoff.n_max.
Eigen::VectorXd rabi_rate_rhs(const Eigen::VectorXd& populations, const ModelParams& params);

struct RabiRateTrajectory {
    std::vector<double> times;
    std::vector<Eigen::VectorXd> populations;
};

RabiRateTrajectory integrate_rabi_rates(const ModelParams& params, const Eigen::VectorXd& initial,
                                        const TimeGrid& grid);

struct FiniteTPrediction {
    double beta = 0.0;             // inverse temperature, infinite at nbar = 0
    double partition = 1.0;        // Z = 1 / (1 - e^{-beta omega0})
    double dot_partition = 0.0;    // Z' = 1 + e^{-beta E_g}
    double effective_counter = 0.0;  // (w - 1/Z') / (1 + nbar)^2
    double energy_loss = 0.0;      // E_g (1/(1 + e^{-beta E_g}) - w)
};

FiniteTPrediction finite_T_prediction(const ModelParams& params, double weight);

}  // namespace bornsim::analytic
