#include "bornsim/observables.hpp"

#include <cmath>
#include <sstream>

namespace bornsim {

namespace {

FockCutoff cutoff_of(const DensityMatrix& rho) {
    if (rho.dim() % 2 != 0) throw DimensionMismatch("state dimension is not 2*(n_max+1)");
    return FockCutoff{rho.dim() / 2 - 1};
}

void require_dressed(const Trajectory& traj) {
    if (!traj.has_dressed) {
        throw InvalidArgument("trajectory carries no dressed populations (JC with n_max >= 1 required)");
    }
}

}  // namespace

double photon_number(const DensityMatrix& rho) {
    const FockCutoff c = cutoff_of(rho);
    double n = 0.0;
    for (int k = 1; k <= c.n_max; ++k) {
        n += k * (rho.op()(basis_index(c, DotState::Ground, k), basis_index(c, DotState::Ground, k)).real() +
                  rho.op()(basis_index(c, DotState::Excited, k), basis_index(c, DotState::Excited, k)).real());
    }
    return n;
}

DressedPopulations dressed_populations(const DensityMatrix& rho, const DressedBasis& basis) {
    const FockCutoff c = cutoff_of(rho);
    DressedPopulations out;
    const auto& r = rho.op();
    out.p_zero = r(basis_index(c, DotState::Ground, 0), basis_index(c, DotState::Ground, 0)).real();
    if (c.n_max < 1) return out;

    const double cs = basis.cos_half();
    const double sn = basis.sin_half();
    StateVector plus = StateVector::Zero(rho.dim());
    StateVector minus = StateVector::Zero(rho.dim());
    const int g1 = basis_index(c, DotState::Ground, 1);
    const int e0 = basis_index(c, DotState::Excited, 0);
    plus(g1) = cs;
    plus(e0) = sn;
    minus(g1) = -sn;
    minus(e0) = cs;
    out.p_plus = plus.dot(r * plus).real();
    out.p_minus = minus.dot(r * minus).real();
    out.p_pm = plus.dot(r * minus);
    return out;
}

double dressed_photon_number(const DressedPopulations& pops, const DressedBasis& basis) {
    const double c = basis.cos_half();
    const double s = basis.sin_half();
    return c * c * pops.p_plus + s * s * pops.p_minus - 2.0 * c * s * pops.p_pm.real();
}

std::vector<double> time_derivative(const std::vector<double>& t, const std::vector<double>& f) {
    if (t.size() != f.size()) throw DimensionMismatch("time_derivative: size mismatch");
    const std::size_t n = t.size();
    std::vector<double> d(n, 0.0);
    if (n < 2) return d;
    if (n == 2) {
        d[0] = d[1] = (f[1] - f[0]) / (t[1] - t[0]);
        return d;
    }
    // Lagrange three-point derivative at x0 using nodes x0, x1, x2.
    auto three_point = [](double x, double x0, double x1, double x2, double f0, double f1, double f2) {
        const double l1 = (2.0 * x - x0 - x2) / ((x1 - x0) * (x1 - x2));
        const double l2 = (2.0 * x - x0 - x1) / ((x2 - x0) * (x2 - x1));
        return l1 * (f1 - f0) + l2 * (f2 - f0);
    };
    d[0] = three_point(t[0], t[0], t[1], t[2], f[0], f[1], f[2]);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        d[i] = three_point(t[i], t[i - 1], t[i], t[i + 1], f[i - 1], f[i], f[i + 1]);
    }
    d[n - 1] = three_point(t[n - 1], t[n - 3], t[n - 2], t[n - 1], f[n - 3], f[n - 2], f[n - 1]);
    return d;
}

std::vector<double> energy_current(const Trajectory& traj, CurrentMethod method) {
    if (method != CurrentMethod::EnergyDerivative) {
        throw InvalidArgument("energy_current: this method needs model parameters and a dressed basis");
    }
    std::vector<double> j = time_derivative(traj.times, traj.energy);
    for (double& x : j) x = -x;
    return j;
}

std::vector<double> energy_current(const Trajectory& traj, const ModelParams& params,
                                   const DressedBasis& basis, CurrentMethod method) {
    switch (method) {
        case CurrentMethod::EnergyDerivative:
            return energy_current(traj, method);

        case CurrentMethod::DressedFormula: {
            if (params.coupling != CouplingKind::JC) {
                throw InvalidArgument("energy_current: DressedFormula requires the JC model");
            }
            require_dressed(traj);
            const double c = basis.cos_half();
            const double s = basis.sin_half();
            const double k = params.kappa;
            std::vector<double> j(traj.size());
            for (std::size_t i = 0; i < traj.size(); ++i) {
                const double re = traj.p_pm[i].real();
                j[i] = basis.E_plus_trans * k * (c * c * traj.p_plus[i] - c * s * re) +
                       basis.E_minus_trans * k * (s * s * traj.p_minus[i] - c * s * re);
            }
            return j;
        }

        case CurrentMethod::FiniteTFormula: {
            if (params.coupling != CouplingKind::JC) {
                throw InvalidArgument("energy_current: FiniteTFormula requires the JC model");
            }
            if (params.nbar < 0.0) throw InvalidArgument("energy_current: nbar must be >= 0");
            require_dressed(traj);
            std::vector<double> diff(traj.size());
            for (std::size_t i = 0; i < traj.size(); ++i) diff[i] = traj.p_minus[i] - traj.p_plus[i];
            const std::vector<double> ddiff = time_derivative(traj.times, diff);
            const double mean_trans = 0.5 * (basis.E_plus_trans + basis.E_minus_trans);
            const double k = params.kappa;
            const double nb = params.nbar;
            std::vector<double> j(traj.size());
            for (std::size_t i = 0; i < traj.size(); ++i) {
                j[i] = mean_trans * (k * (1.0 + nb) * traj.manifold_photons[i] - k * nb * traj.p_zero[i]) +
                       0.5 * basis.Lambda * ddiff[i];
            }
            return j;
        }
    }
    throw InvalidArgument("energy_current: unknown method");
}

std::vector<double> measured_probability_series(const Trajectory& traj) {
    std::vector<double> p(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) p[i] = traj.kappa * traj.photon_integral[i];
    return p;
}

std::vector<double> effective_counter_series(const Trajectory& traj) {
    const double backflow = traj.nbar / (1.0 + traj.nbar);
    std::vector<double> p(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) {
        p[i] = traj.kappa * (traj.manifold_integral[i] - backflow * traj.p_zero_integral[i]);
    }
    return p;
}

double measured_probability(const Trajectory& traj, double min_horizon_rates) {
    if (traj.size() == 0) throw InvalidArgument("measured_probability: empty trajectory");
    if (!(traj.kappa > 0.0)) throw InvalidArgument("measured_probability: kappa must be > 0");
    const double required = min_horizon_rates / traj.kappa;
    // One step of slack for grids whose last point rounds just below t_max.
    if (traj.times.back() + traj.dt * 0.5 < required) {
        std::ostringstream msg;
        msg << "measured_probability: horizon t = " << traj.times.back() << " is too short; need t_max >= "
            << required;
        throw InvalidArgument(msg.str());
    }
    if (traj.nbar == 0.0) return traj.kappa * traj.photon_integral.back();
    return effective_counter_series(traj).back();
}

std::vector<double> accumulated_energy_series(const Trajectory& traj) {
    std::vector<double> e(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) e[i] = traj.energy.front() - traj.energy[i];
    return e;
}

double accumulated_energy(const Trajectory& traj) {
    if (traj.size() == 0) throw InvalidArgument("accumulated_energy: empty trajectory");
    return traj.energy.front() - traj.energy.back();
}

double channel_energy(const Trajectory& traj, const DressedBasis& basis) {
    require_dressed(traj);
    return -(basis.E_plus_trans * (traj.p_plus.back() - traj.p_plus.front()) +
             basis.E_minus_trans * (traj.p_minus.back() - traj.p_minus.front()));
}

}  // namespace bornsim
