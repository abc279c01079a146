#pragma once

#include <vector>

#include "bornsim/dynamics.hpp"

namespace bornsim {

enum class CurrentMethod {
    EnergyDerivative,  // -d<H>/dt by finite differences of the recorded energy
    DressedFormula,    // population/coherence expression on the n <= 1 manifold
    FiniteTFormula,    // photon-number form including the thermal backflow
};

/// Tr(rho a^dagger a); the component dimension must be even.
double photon_number(const DensityMatrix& rho);

struct DressedPopulations {
    double p_plus = 0.0;
    double p_minus = 0.0;
    double p_zero = 0.0;
    Complex p_pm{0.0, 0.0};
};

/// Projections of rho on |psi_{1,+}>, |psi_{1,-}>, |0,g> and the +- coherence.
DressedPopulations dressed_populations(const DensityMatrix& rho, const DressedBasis& basis);

/// cos^2(t/2) P_+ + sin^2(t/2) P_- - 2 cos(t/2) sin(t/2) Re P_{+-}.
double dressed_photon_number(const DressedPopulations& pops, const DressedBasis& basis);

/// df/dt on a possibly non-uniform grid: three-point central stencil inside,
/// second-order one-sided stencils at both ends.
std::vector<double> time_derivative(const std::vector<double>& times, const std::vector<double>& values);

/// Energy current J(t) on the recorded times of `traj`.
/// Throws InvalidArgument when the method does not apply to params.
std::vector<double> energy_current(const Trajectory& traj, const ModelParams& params,
                                   const DressedBasis& basis, CurrentMethod method);
/// Same, for methods that need no dressed basis (EnergyDerivative).
std::vector<double> energy_current(const Trajectory& traj, CurrentMethod method);

/// kappa * int_0^t <a^dagger a>, per recorded time.
std::vector<double> measured_probability_series(const Trajectory& traj);

/// kappa * int (n_1g - nbar P0 / (1 + nbar)) per recorded time, n_1g being
/// the photon number carried by the lowest dressed manifold. Equals the
/// plain counter for JC at nbar = 0.
std::vector<double> effective_counter_series(const Trajectory& traj);

/// Counter reading at the end of the trajectory: kappa int <a^dagger a> at
/// nbar = 0, the effective counter otherwise. Throws InvalidArgument when the
/// trajectory is shorter than `min_horizon_rates / kappa`.
double measured_probability(const Trajectory& traj, double min_horizon_rates = 20.0);

/// <H>(0) - <H>(t) per recorded time.
std::vector<double> accumulated_energy_series(const Trajectory& traj);
double accumulated_energy(const Trajectory& traj);

/// -[E_+ (P_+(t) - P_+(0)) + E_- (P_-(t) - P_-(0))] with transition energies.
double channel_energy(const Trajectory& traj, const DressedBasis& basis);

}  // namespace bornsim
