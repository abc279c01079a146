#include "bornsim/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <unsupported/Eigen/MatrixFunctions>

#include "bornsim/rk4.hpp"

namespace bornsim::analytic {

namespace {

constexpr double kResonanceTol = 1e-12;

struct HalfAngles {
    double c = 1.0;
    double s = 0.0;
    double gap = 0.0;
};

HalfAngles half_angles(const ModelParams& params) {
    if (params.coupling != CouplingKind::JC) {
        throw InvalidArgument("secular predictions are defined for the JC model");
    }
    const DressedBasis b = dressed_basis(params, 1);
    return {b.cos_half(), b.sin_half(), b.Lambda};
}

void require_weight(double w) {
    if (!(w >= 0.0 && w <= 1.0)) throw InvalidArgument("weight must lie in [0, 1]");
}

void require_resonance(const ModelParams& params, const char* who) {
    if (std::abs(params.detuning()) > kResonanceTol) {
        throw InvalidArgument(std::string(who) + ": requires resonance omega0 + E_g - E_e = 0");
    }
}

/// Re{(1 - e^{-z t}) / z} with z = kappa/2 + i Lambda.
double coherence_integral(double kappa, double gap, double t) {
    const Complex z(0.5 * kappa, gap);
    if (std::abs(z) == 0.0) return t;
    return ((1.0 - std::exp(-z * t)) / z).real();
}

}  // namespace

SecularSolution secular_solution(const ModelParams& params, double weight, double t) {
    require_weight(weight);
    const auto [c, s, gap] = half_angles(params);
    const double k = params.kappa;
    SecularSolution out;
    out.p_plus = weight * std::exp(-k * c * c * t) * s * s;
    out.p_minus = weight * std::exp(-k * s * s * t) * c * c;
    out.p_pm = weight * std::exp(-Complex(0.5 * k, gap) * t) * c * s;
    return out;
}

ResonanceForms resonance_closed_forms(const ModelParams& params, double t, double weight) {
    require_resonance(params, "resonance_closed_forms");
    require_weight(weight);
    const double n = weight * std::exp(-0.5 * params.kappa * t) * 0.5 * (1.0 - std::cos(2.0 * params.lambda * t));
    return {n, params.kappa * (-params.E_g) * n};
}

QuasiStepSchedule quasi_step_schedule(const ModelParams& params) {
    if (!(params.lambda > 0.0) || !(params.kappa > 0.0)) {
        throw InvalidArgument("quasi_step_schedule: lambda and kappa must be > 0");
    }
    QuasiStepSchedule s;
    s.period = std::numbers::pi / params.lambda;
    s.critical_number = 2.0 * params.lambda / params.kappa;
    s.critical_time = s.critical_number * s.period;
    return s;
}

QuasiStep quasi_step_prediction(const ModelParams& params, int n) {
    require_resonance(params, "quasi_step_prediction");
    if (n < 1) throw InvalidArgument("quasi_step_prediction: n must be >= 1");
    QuasiStep q;
    q.schedule = quasi_step_schedule(params);
    const double value = -std::expm1(-n * std::numbers::pi * params.kappa / (2.0 * params.lambda));
    q.measured_probability = value;
    q.energy_fraction = value;
    return q;
}

double secular_measured_probability(const ModelParams& params, double weight, double t) {
    require_weight(weight);
    const auto [c, s, gap] = half_angles(params);
    const double k = params.kappa;
    // sin^2(theta)/4 = c^2 s^2; the 1/cos^2 and 1/sin^2 channel factors are
    // cancelled analytically so theta -> 0 or pi needs no special casing.
    const double plus_channel = -s * s * std::expm1(-c * c * k * t);
    const double minus_channel = -c * c * std::expm1(-s * s * k * t);
    const double coherence = 2.0 * k * c * c * s * s * coherence_integral(k, gap, t);
    return weight * (plus_channel + minus_channel - coherence);
}

double secular_measured_probability_limit(const ModelParams& params, double weight) {
    require_weight(weight);
    const auto [c, s, gap] = half_angles(params);
    const double k = params.kappa;
    return weight * (1.0 - c * c * s * s * k * k / (0.25 * k * k + gap * gap));
}

double slow_channel_horizon(const ModelParams& params, double e_folds) {
    if (!(params.kappa > 0.0)) throw InvalidArgument("kappa must be positive");
    const auto [c, s, gap] = half_angles(params);
    (void)gap;
    return e_folds / (params.kappa * std::min(c * c, s * s));
}

double secular_accumulated_energy(const ModelParams& params, double weight, double t) {
    require_weight(weight);
    const auto [c, s, gap] = half_angles(params);
    const DressedBasis b = dressed_basis(params, 1);
    const double k = params.kappa;
    const double plus_channel = -b.E_plus_trans * s * s * std::expm1(-c * c * k * t);
    const double minus_channel = -b.E_minus_trans * c * c * std::expm1(-s * s * k * t);
    const double coherence =
        k * c * c * s * s * (b.E_plus_trans + b.E_minus_trans) * coherence_integral(k, gap, t);
    return weight * (plus_channel + minus_channel - coherence);
}

ManifoldState manifold_initial_state(const ModelParams& params, double weight) {
    require_weight(weight);
    const auto [c, s, gap] = half_angles(params);
    (void)gap;
    ManifoldState y;
    y << weight * s * s, weight * c * c, weight * s * c, 1.0 - weight;
    return y;
}

double manifold_photon_number(const ManifoldState& y, const ModelParams& params) {
    const auto [c, s, gap] = half_angles(params);
    (void)gap;
    return c * c * y(0).real() + s * s * y(1).real() - 2.0 * c * s * y(2).real();
}

ManifoldState dressed_exact_rhs(const ManifoldState& y, const ModelParams& params, bool secular) {
    if (params.nbar != 0.0) throw InvalidArgument("dressed_exact_rhs: zero-temperature equations only");
    const auto [c, s, gap] = half_angles(params);
    const double k = params.kappa;
    const double re_pm = y(2).real();
    const double cross = secular ? 0.0 : k * c * s;
    ManifoldState dy;
    dy(0) = -k * c * c * y(0).real() + cross * re_pm;
    dy(1) = -k * s * s * y(1).real() + cross * re_pm;
    dy(2) = -Complex(0.5 * k, gap) * y(2) + 0.5 * cross * (y(0).real() + y(1).real());
    // P_0 gains what the photon field loses; secular mode keeps the total.
    dy(3) = -(dy(0) + dy(1));
    return dy;
}

ManifoldTrajectory integrate_dressed_exact(const ModelParams& params, const ManifoldState& initial,
                                           const TimeGrid& grid, bool secular) {
    grid.validate();
    ManifoldTrajectory out;
    ManifoldState y = initial;
    Rk4<ManifoldState> stepper(y);
    auto rhs = [&](const ManifoldState& state, ManifoldState& dy) { dy = dressed_exact_rhs(state, params, secular); };
    const long steps = grid.steps();
    out.times.push_back(0.0);
    out.states.push_back(y);
    for (long k = 1; k <= steps; ++k) {
        stepper.step(y, grid.dt, rhs);
        if (k % grid.record_stride == 0 || k == steps) {
            out.times.push_back(static_cast<double>(k) * grid.dt);
            out.states.push_back(y);
        }
    }
    return out;
}

double coherent_overlap(double ratio, int n) {
    if (n < 0) throw InvalidArgument("coherent_overlap: n must be >= 0");
    const double y = 4.0 * ratio * ratio;  // (2 lambda / omega0)^2
    // term_r = (-1)^r C(n, r) y^(n-r) / (n-r)!
    double sum = 0.0;
    for (int r = 0; r <= n; ++r) {
        const double log_mag = std::lgamma(n + 1.0) - std::lgamma(r + 1.0) - 2.0 * std::lgamma(n - r + 1.0);
        double term = std::exp(log_mag) * std::pow(y, n - r);
        if (r % 2 == 1) term = -term;
        sum += term;
    }
    return std::exp(-2.0 * ratio * ratio) * sum;
}

RabiPerturbation rabi_perturbation(const ModelParams& params, int n) {
    params.validate();
    if (n < 0) throw InvalidArgument("rabi_perturbation: n must be >= 0");
    const double ratio = params.lambda / params.omega0;
    RabiPerturbation p;
    p.n = n;
    p.overlap = coherent_overlap(ratio, n);
    const double tunnel = p.overlap * p.overlap * (params.E_g - params.E_e) / 2.0;
    const double base = params.omega0 * n - params.lambda * params.lambda / params.omega0 +
                        0.5 * (params.E_g + params.E_e);
    p.E_plus = base - tunnel;
    p.E_minus = base + tunnel;
    p.steady_photons = ratio * ratio;
    return p;
}

StateVector rabi_perturbative_state(const ModelParams& params, int n, int sign) {
    params.validate();
    const FockCutoff c = params.cutoff;
    if (n < 0 || n > c.n_max) throw InvalidArgument("rabi_perturbative_state: n outside cutoff");
    const double alpha = params.lambda / params.omega0;

    // Displace on a padded space, then truncate to the cutoff.
    const int padded = c.photon_dim() + 40;
    const OperatorMatrix a = annihilation_op(FockCutoff{padded - 1});
    const OperatorMatrix generator = alpha * (a.adjoint() - a);
    const OperatorMatrix shift_plus = generator.exp();
    const OperatorMatrix shift_minus = (-generator).exp();
    const StateVector displaced_plus = shift_plus.col(n).head(c.photon_dim());    // D(+alpha)|n>
    const StateVector displaced_minus = shift_minus.col(n).head(c.photon_dim());  // D(-alpha)|n>

    const double r2 = std::numbers::sqrt2 / 2.0;
    StateVector dot_plus = StateVector::Zero(2);   // (|e> + |g>)/sqrt2
    StateVector dot_minus = StateVector::Zero(2);  // (|e> - |g>)/sqrt2
    dot_plus << r2, r2;
    dot_minus << -r2, r2;

    auto kron = [](const StateVector& dot, const StateVector& photon) {
        StateVector v(dot.size() * photon.size());
        for (Eigen::Index i = 0; i < dot.size(); ++i) v.segment(i * photon.size(), photon.size()) = dot(i) * photon;
        return v;
    };
    // sigma_x = +1 is displaced towards -alpha by lambda (a + a^dagger) sigma_x.
    StateVector psi = kron(dot_minus, displaced_plus) + (sign >= 0 ? 1.0 : -1.0) * kron(dot_plus, displaced_minus);
    return psi / psi.norm();
}

DensityMatrix rabi_steady_mixture(const ModelParams& params) {
    const StateVector p = rabi_perturbative_state(params, 0, +1);
    const StateVector m = rabi_perturbative_state(params, 0, -1);
    OperatorMatrix rho = 0.5 * (p * p.adjoint() + m * m.adjoint());
    rho /= rho.trace().real();
    return DensityMatrix(std::move(rho));
}

Eigen::VectorXd rabi_rate_rhs(const Eigen::VectorXd& p, const ModelParams& params) {
    const int levels = params.cutoff.photon_dim();
    if (p.size() != 2 * levels) throw DimensionMismatch("rabi_rate_rhs: expected 2*(n_max+1) populations");
    const double k = params.kappa;
    const double mix = k * std::pow(params.lambda / params.omega0, 2);
    Eigen::VectorXd dp(p.size());
    for (int n = 0; n < levels; ++n) {
        for (int branch = 0; branch < 2; ++branch) {
            const int i = 2 * n + branch;
            const int other = 2 * n + (1 - branch);
            const double inflow = (n + 1 < levels) ? k * (n + 1) * p(2 * (n + 1) + branch) : 0.0;
            dp(i) = inflow - k * n * p(i) + mix * (p(other) - p(i));
        }
    }
    return dp;
}

RabiRateTrajectory integrate_rabi_rates(const ModelParams& params, const Eigen::VectorXd& initial,
                                        const TimeGrid& grid) {
    grid.validate();
    RabiRateTrajectory out;
    Eigen::VectorXd y = initial;
    Rk4<Eigen::VectorXd> stepper(y);
    auto rhs = [&](const Eigen::VectorXd& state, Eigen::VectorXd& dy) { dy = rabi_rate_rhs(state, params); };
    const long steps = grid.steps();
    out.times.push_back(0.0);
    out.populations.push_back(y);
    for (long k = 1; k <= steps; ++k) {
        stepper.step(y, grid.dt, rhs);
        if (k % grid.record_stride == 0 || k == steps) {
            out.times.push_back(static_cast<double>(k) * grid.dt);
            out.populations.push_back(y);
        }
    }
    return out;
}

FiniteTPrediction finite_T_prediction(const ModelParams& params, double weight) {
    params.validate();
    require_weight(weight);
    const double inf = std::numeric_limits<double>::infinity();
    FiniteTPrediction f;
    const double nb = params.nbar;
    double ground_share = 0.0;  // 1 / (1 + e^{-beta E_g})
    if (nb == 0.0) {
        f.beta = inf;
        f.partition = 1.0;
        if (params.E_g < 0.0) {
            f.dot_partition = inf;
            ground_share = 0.0;
        } else if (params.E_g > 0.0) {
            f.dot_partition = 1.0;
            ground_share = 1.0;
        } else {
            f.dot_partition = 2.0;
            ground_share = 0.5;
        }
    } else {
        f.beta = std::log1p(1.0 / nb) / params.omega0;
        f.partition = 1.0 / (-std::expm1(-f.beta * params.omega0));
        f.dot_partition = 1.0 + std::exp(-f.beta * params.E_g);
        ground_share = 1.0 / f.dot_partition;
    }
    f.effective_counter = (weight - ground_share) / ((1.0 + nb) * (1.0 + nb));
    f.energy_loss = params.E_g * (ground_share - weight);
    return f;
}

}  // namespace bornsim::analytic
