#include "bornsim/model.hpp"

#include <cmath>
#include <sstream>

#include "bornsim/errors.hpp"

namespace bornsim {

void ModelParams::validate() const {
    auto fail = [](const char* what) { throw InvalidArgument(std::string("ModelParams: ") + what); };
    if (!(omega0 > 0.0)) fail("omega0 must be > 0");
    if (!(lambda >= 0.0)) fail("lambda must be >= 0");
    if (!(kappa >= 0.0)) fail("kappa must be >= 0");
    if (!(nbar >= 0.0)) fail("nbar must be >= 0");
    if (cutoff.n_max < 0) fail("n_max must be >= 0");
    if (!std::isfinite(E_e) || !std::isfinite(E_g)) fail("dot energies must be finite");
}

BornState::BornState(double weight_l) : weight_l_(weight_l) {
    if (!(weight_l >= 0.0 && weight_l <= 1.0)) {
        throw InvalidArgument("BornState: weight must lie in [0, 1]");
    }
}

double DressedBasis::cos_half() const { return std::cos(0.5 * theta); }
double DressedBasis::sin_half() const { return std::sin(0.5 * theta); }

double mixing_angle(const ModelParams& params, int n) {
    if (n < 1) throw InvalidArgument("mixing_angle: n must be >= 1");
    // atan2 gives exactly pi/2 at resonance and stays in [0, pi] for lambda >= 0.
    return std::atan2(2.0 * params.lambda * std::sqrt(static_cast<double>(n)), params.detuning());
}

double jc_eigenvalue(const ModelParams& params, int n, int sign) {
    if (n < 1) throw InvalidArgument("jc_eigenvalue: n must be >= 1");
    const double half_det = 0.5 * params.detuning();
    const double center = params.omega0 * n + 0.5 * (params.E_g + params.E_e - params.omega0);
    const double split = std::sqrt(half_det * half_det + params.lambda * params.lambda * n);
    return center + (sign >= 0 ? split : -split);
}

namespace {

OperatorMatrix bare_hamiltonian(const ModelParams& params) {
    const FockCutoff c = params.cutoff;
    const OperatorMatrix dot = params.E_e * projector_excited() + params.E_g * projector_ground();
    return tensor_product(dot, identity(c.photon_dim())) +
           params.omega0 * tensor_product(identity(2), number_op(c));
}

}  // namespace

OperatorMatrix jc_hamiltonian(const ModelParams& params) {
    params.validate();
    if (params.coupling != CouplingKind::JC) {
        throw InvalidArgument("jc_hamiltonian: params.coupling must be JC");
    }
    const FockCutoff c = params.cutoff;
    const OperatorMatrix a = annihilation_op(c);
    const OperatorMatrix ad = a.adjoint();
    const OperatorMatrix coupling =
        tensor_product(sigma_lower(), ad) + tensor_product(sigma_raise(), a);
    return bare_hamiltonian(params) + params.lambda * coupling;
}

OperatorMatrix rabi_hamiltonian(const ModelParams& params) {
    params.validate();
    if (params.coupling != CouplingKind::Rabi) {
        throw InvalidArgument("rabi_hamiltonian: params.coupling must be Rabi");
    }
    const FockCutoff c = params.cutoff;
    const OperatorMatrix a = annihilation_op(c);
    const OperatorMatrix field = a + a.adjoint();
    return bare_hamiltonian(params) + params.lambda * tensor_product(sigma_x(), field);
}

OperatorMatrix hamiltonian(const ModelParams& params) {
    return params.coupling == CouplingKind::JC ? jc_hamiltonian(params) : rabi_hamiltonian(params);
}

OperatorMatrix photon_annihilation(FockCutoff cutoff) {
    return tensor_product(identity(2), annihilation_op(cutoff));
}

OperatorMatrix photon_number_op(FockCutoff cutoff) {
    return tensor_product(identity(2), number_op(cutoff));
}

OperatorMatrix excitation_op(FockCutoff cutoff) {
    return photon_number_op(cutoff) +
           tensor_product(projector_excited(), identity(cutoff.photon_dim()));
}

OperatorMatrix parity_op(FockCutoff cutoff) {
    const OperatorMatrix n = excitation_op(cutoff);
    OperatorMatrix p = OperatorMatrix::Zero(n.rows(), n.cols());
    for (Eigen::Index i = 0; i < n.rows(); ++i) {
        const auto count = static_cast<long>(std::lround(n(i, i).real()));
        p(i, i) = (count % 2 == 0) ? 1.0 : -1.0;
    }
    return p;
}

DressedBasis dressed_basis(const ModelParams& params, int n) {
    params.validate();
    if (params.coupling != CouplingKind::JC) {
        throw InvalidArgument("dressed_basis: defined for the JC model only");
    }
    if (n < 1) throw InvalidArgument("dressed_basis: n must be >= 1");
    DressedBasis b;
    b.n = n;
    b.theta = mixing_angle(params, n);
    b.E_n_plus = jc_eigenvalue(params, n, +1);
    b.E_n_minus = jc_eigenvalue(params, n, -1);
    b.E_ground = params.E_g;
    const double e1p = jc_eigenvalue(params, 1, +1);
    const double e1m = jc_eigenvalue(params, 1, -1);
    b.Lambda = std::sqrt(params.detuning() * params.detuning() + 4.0 * params.lambda * params.lambda);
    b.E_plus_trans = e1p - params.E_g;
    b.E_minus_trans = e1m - params.E_g;
    return b;
}

StateVector fock_state(FockCutoff cutoff, DotState dot, int n) {
    if (n < 0 || n > cutoff.n_max) throw InvalidArgument("fock_state: photon number outside cutoff");
    StateVector v = StateVector::Zero(cutoff.component_dim());
    v(basis_index(cutoff, dot, n)) = 1.0;
    return v;
}

StateVector dressed_state(const ModelParams& params, int n, int sign) {
    if (n < 1 || n > params.cutoff.n_max) {
        throw InvalidArgument("dressed_state: manifold n must satisfy 1 <= n <= n_max");
    }
    const double theta = mixing_angle(params, n);
    const double c = std::cos(0.5 * theta);
    const double s = std::sin(0.5 * theta);
    const StateVector ng = fock_state(params.cutoff, DotState::Ground, n);
    const StateVector ne = fock_state(params.cutoff, DotState::Excited, n - 1);
    if (sign >= 0) return c * ng + s * ne;
    return -s * ng + c * ne;
}

Eigen::VectorXd thermal_populations(double nbar, FockCutoff cutoff) {
    if (nbar < 0.0) throw InvalidArgument("thermal_populations: nbar must be >= 0");
    const int d = cutoff.photon_dim();
    Eigen::VectorXd p = Eigen::VectorXd::Zero(d);
    if (nbar == 0.0) {
        p(0) = 1.0;
        return p;
    }
    // exp(-beta omega0) with beta = ln(1 + 1/nbar) / omega0.
    const double ratio = nbar / (1.0 + nbar);
    const double tail = std::pow(ratio, d);
    if (tail >= 1e-10) {
        std::ostringstream msg;
        msg << "thermal_populations: n_max = " << cutoff.n_max << " discards thermal mass " << tail
            << " (need < 1e-10)";
        throw InvalidArgument(msg.str());
    }
    double w = 1.0;
    for (int n = 0; n < d; ++n) {
        p(n) = w;
        w *= ratio;
    }
    return p / p.sum();
}

DensityMatrix initial_state(double weight, const ModelParams& params) {
    params.validate();
    if (!(weight >= 0.0 && weight <= 1.0)) throw InvalidArgument("initial_state: weight outside [0, 1]");
    const FockCutoff c = params.cutoff;
    const Eigen::VectorXd photons = thermal_populations(params.nbar, c);
    OperatorMatrix rho = OperatorMatrix::Zero(c.component_dim(), c.component_dim());
    for (int n = 0; n < c.photon_dim(); ++n) {
        const int e = basis_index(c, DotState::Excited, n);
        const int g = basis_index(c, DotState::Ground, n);
        rho(e, e) = weight * photons(n);
        rho(g, g) = (1.0 - weight) * photons(n);
    }
    return DensityMatrix(std::move(rho));
}

DensityMatrix initial_state(const BornState& born, Side side, const ModelParams& params) {
    const double w = side == Side::Left ? born.weight_l() : born.weight_r();
    return initial_state(w, params);
}

}  // namespace bornsim
