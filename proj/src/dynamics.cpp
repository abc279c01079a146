#include "bornsim/dynamics.hpp"

#include <algorithm>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

#include <unsupported/Eigen/KroneckerProduct>

#include "bornsim/rk4.hpp"

namespace bornsim {

namespace {

constexpr Complex kI{0.0, 1.0};

Eigen::SparseMatrix<Complex, Eigen::RowMajor> to_sparse(const OperatorMatrix& m) {
    return m.sparseView(Complex(1.0), 1e-300);
}

OperatorMatrix integration_hamiltonian(const ModelParams& params, Frame frame) {
    OperatorMatrix h = hamiltonian(params);
    if (frame == Frame::CoRotating) {
        if (params.coupling != CouplingKind::JC) {
            throw InvalidArgument("co-rotating frame requires the excitation-conserving JC model");
        }
        h -= params.omega0 * excitation_op(params.cutoff);
        const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<OperatorMatrix>(h, Eigen::EigenvaluesOnly).eigenvalues();
        h -= 0.5 * (ev.minCoeff() + ev.maxCoeff()) * OperatorMatrix::Identity(h.rows(), h.cols());
    }
    return h;
}

/// Projections of rho onto the n <= 1 dressed states; amplitudes of
/// |psi_{1,+}> = c|1,g> + s|0,e> and |psi_{1,-}> = -s|1,g> + c|0,e>.
struct ManifoldProbe {
    int g0 = 0, g1 = 0, e0 = 0;
    double c = 1.0, s = 0.0;

    template <class R>
    double p_plus(const R& r) const {
        return c * c * r(g1, g1).real() + s * s * r(e0, e0).real() + 2.0 * c * s * r(g1, e0).real();
    }
    template <class R>
    double p_minus(const R& r) const {
        return s * s * r(g1, g1).real() + c * c * r(e0, e0).real() - 2.0 * c * s * r(g1, e0).real();
    }
    template <class R>
    Complex p_pm(const R& r) const {
        // <psi_+| rho |psi_->
        return -c * s * r(g1, g1) + c * c * r(g1, e0) - s * s * r(e0, g1) + s * c * r(e0, e0);
    }
};

double hermiticity_drift(const OperatorMatrix& r) { return (r - r.adjoint()).cwiseAbs().maxCoeff(); }

/// The generator restricted to the matrix entries reachable from the
/// support of rho0; all other entries stay exactly zero. The derivative is
/// made Hermitian entrywise, so the state stays Hermitian by construction.
class ReducedGenerator {
public:
    ReducedGenerator(const Lindbladian& l, const OperatorMatrix& rho0) : dim_(l.dim()) {
        const long n = static_cast<long>(dim_) * dim_;
        const Eigen::SparseMatrix<Complex, Eigen::ColMajor> full = l.superoperator();
        pos_.assign(static_cast<std::size_t>(n), -1);
        std::vector<long> queue;
        auto visit = [&](long f) {
            if (pos_[f] >= 0) return;
            pos_[f] = static_cast<long>(flat_.size());
            flat_.push_back(f);
            queue.push_back(f);
        };
        for (int i = 0; i < dim_; ++i) {
            for (int j = 0; j < dim_; ++j) {
                if (rho0(i, j) != Complex(0.0)) visit(static_cast<long>(i) * dim_ + j);
            }
        }
        while (!queue.empty()) {
            const long f = queue.back();
            queue.pop_back();
            visit((f % dim_) * dim_ + f / dim_);
            for (decltype(full)::InnerIterator it(full, f); it; ++it) visit(it.row());
        }
        std::sort(flat_.begin(), flat_.end());
        for (std::size_t r = 0; r < flat_.size(); ++r) pos_[flat_[r]] = static_cast<long>(r);

        std::vector<Eigen::Triplet<Complex>> trips;
        const Eigen::SparseMatrix<Complex, Eigen::RowMajor> rows = full;
        for (std::size_t r = 0; r < flat_.size(); ++r) {
            for (decltype(rows)::InnerIterator it(rows, flat_[r]); it; ++it) {
                if (pos_[it.col()] < 0) continue;
                trips.emplace_back(static_cast<int>(r), static_cast<int>(pos_[it.col()]), it.value());
            }
        }
        const int m = static_cast<int>(flat_.size());
        s_.resize(m, m);
        s_.setFromTriplets(trips.begin(), trips.end());
        transpose_.resize(flat_.size());
        for (std::size_t r = 0; r < flat_.size(); ++r) {
            transpose_[r] = pos_[(flat_[r] % dim_) * dim_ + flat_[r] / dim_];
        }
    }

    int size() const { return static_cast<int>(flat_.size()); }

    void apply(const StateVector& x, StateVector& out) const {
        out.noalias() = s_ * x;
        for (std::size_t r = 0; r < transpose_.size(); ++r) {
            const auto t = static_cast<std::size_t>(transpose_[r]);
            if (t < r) continue;
            const Complex v = 0.5 * (out[r] + std::conj(out[t]));
            out[r] = v;
            out[t] = std::conj(v);
        }
    }

    StateVector pack(const OperatorMatrix& rho) const {
        StateVector x(size());
        for (std::size_t r = 0; r < flat_.size(); ++r) x[r] = rho(flat_[r] / dim_, flat_[r] % dim_);
        return x;
    }

    OperatorMatrix unpack(const StateVector& x) const {
        OperatorMatrix rho = OperatorMatrix::Zero(dim_, dim_);
        for (std::size_t r = 0; r < flat_.size(); ++r) rho(flat_[r] / dim_, flat_[r] % dim_) = x[r];
        return rho;
    }

    /// Reduced position of entry (i, j), or -1 when it is identically zero.
    long position(int i, int j) const { return pos_[static_cast<long>(i) * dim_ + j]; }

private:
    int dim_;
    std::vector<long> flat_;
    std::vector<long> pos_;
    std::vector<long> transpose_;
    Eigen::SparseMatrix<Complex, Eigen::RowMajor> s_;
};

/// Reads entries of a reduced state by matrix index.
struct EntryReader {
    const ReducedGenerator& gen;
    const StateVector& x;
    Complex operator()(int i, int j) const {
        const long p = gen.position(i, j);
        return p >= 0 ? x[p] : Complex(0.0);
    }
};

}  // namespace

void TimeGrid::validate() const {
    if (!(dt > 0.0)) throw InvalidArgument("TimeGrid: dt must be > 0");
    if (!(t_max >= dt)) throw InvalidArgument("TimeGrid: t_max must be >= dt");
    if (record_stride < 1) throw InvalidArgument("TimeGrid: record_stride must be >= 1");
}

long TimeGrid::steps() const {
    // Guard against t_max/dt landing a rounding error above an integer.
    return static_cast<long>(std::ceil(t_max / dt - 1e-9));
}

Lindbladian::Lindbladian(const ModelParams& params, Frame frame)
    : dim_(params.dim()), frame_(frame) {
    params.validate();
    const OperatorMatrix h = integration_hamiltonian(params, frame);
    generator_norm_ = spectral_radius_hermitian(h);
    rate_down_ = params.kappa * (1.0 + params.nbar);
    rate_up_ = params.kappa * params.nbar;

    const OperatorMatrix a = photon_annihilation(params.cutoff);
    const OperatorMatrix ad = a.adjoint();
    const OperatorMatrix h_eff = h - 0.5 * kI * (rate_down_ * (ad * a) + rate_up_ * (a * ad));
    h_eff_ = to_sparse(h_eff);
    a_ = to_sparse(a);
    a_dag_ = to_sparse(ad);
    work_.resize(dim_, dim_);
    work2_.resize(dim_, dim_);
    herm_.resize(dim_, dim_);
}

void Lindbladian::apply(const OperatorMatrix& rho_in, OperatorMatrix& out) const {
    // Acts on the Hermitian part, so round-off in the input cannot feed back.
    herm_ = 0.5 * (rho_in + rho_in.adjoint());
    const OperatorMatrix& rho = herm_;
    work_.noalias() = h_eff_ * rho;
    out = -kI * (work_ - work_.adjoint());
    if (rate_down_ > 0.0) {
        work_.noalias() = a_ * rho;
        work2_.noalias() = work_ * a_dag_;
        out += rate_down_ * work2_;
    }
    if (rate_up_ > 0.0) {
        work_.noalias() = a_dag_ * rho;
        work2_.noalias() = work_ * a_;
        out += rate_up_ * work2_;
    }
}

Eigen::SparseMatrix<Complex, Eigen::RowMajor> Lindbladian::superoperator() const {
    // Row-major vec: vec(A X B) = (A kron B^T) vec(X).
    using Sp = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;
    Sp id(dim_, dim_);
    id.setIdentity();
    const Sp h_eff_adj_t = Sp(h_eff_.adjoint()).transpose();
    Sp s = Sp(Eigen::kroneckerProduct(h_eff_, id)) - Sp(Eigen::kroneckerProduct(id, h_eff_adj_t));
    s *= -kI;
    if (rate_down_ > 0.0) s += rate_down_ * Sp(Eigen::kroneckerProduct(a_, Sp(a_dag_.transpose())));
    if (rate_up_ > 0.0) s += rate_up_ * Sp(Eigen::kroneckerProduct(a_dag_, Sp(a_.transpose())));
    s.prune(Complex(0.0));
    return s;
}

OperatorMatrix Lindbladian::operator()(const OperatorMatrix& rho) const {
    OperatorMatrix out(dim_, dim_);
    apply(rho, out);
    return out;
}

OperatorMatrix lindblad_rhs(const DensityMatrix& rho, const ModelParams& params) {
    if (rho.dim() != params.dim()) {
        std::ostringstream msg;
        msg << "lindblad_rhs: state dimension " << rho.dim() << " does not match model dimension "
            << params.dim();
        throw DimensionMismatch(msg.str());
    }
    return Lindbladian(params, Frame::Lab)(rho.op());
}

Frame natural_frame(const ModelParams& params) {
    return params.coupling == CouplingKind::JC ? Frame::CoRotating : Frame::Lab;
}

double default_time_step(const ModelParams& params) {
    const OperatorMatrix h = integration_hamiltonian(params, natural_frame(params));
    const double norm = spectral_radius_hermitian(h);
    return norm > 0.0 ? std::min(0.01, kStabilityBound / norm) : 0.01;
}

namespace {

void check_stability(const Lindbladian& l, double dt) {
    const double norm = l.generator_norm();
    if (dt * norm > kStabilityBound * (1.0 + 1e-12)) {
        const double suggested = kStabilityBound / norm;
        std::ostringstream msg;
        msg << "dt = " << dt << " violates dt*|H| <= " << kStabilityBound << " (|H| = " << norm
            << "); use dt <= " << suggested;
        throw StabilityError(msg.str(), suggested);
    }
}

}  // namespace

Trajectory evolve(const DensityMatrix& rho0, const ModelParams& params, const TimeGrid& grid,
                  const EvolveOptions& options) {
    params.validate();
    grid.validate();
    if (rho0.dim() != params.dim()) throw DimensionMismatch("evolve: initial state dimension mismatch");

    const Frame frame = options.frame.value_or(natural_frame(params));
    const Lindbladian lindbladian(params, frame);
    check_stability(lindbladian, grid.dt);
    const ReducedGenerator gen(lindbladian, rho0.op());

    const FockCutoff c = params.cutoff;
    const Eigen::SparseMatrix<Complex, Eigen::RowMajor> h_lab = to_sparse(hamiltonian(params));
    const int photon_dim = c.photon_dim();

    Trajectory traj;
    traj.dt = grid.dt;
    traj.record_stride = grid.record_stride;
    traj.kappa = params.kappa;
    traj.nbar = params.nbar;
    traj.has_dressed = params.coupling == CouplingKind::JC && c.n_max >= 1;

    ManifoldProbe probe;
    probe.g0 = basis_index(c, DotState::Ground, 0);
    if (traj.has_dressed) {
        const double theta = mixing_angle(params, 1);
        probe.g1 = basis_index(c, DotState::Ground, 1);
        probe.e0 = basis_index(c, DotState::Excited, 0);
        probe.c = std::cos(0.5 * theta);
        probe.s = std::sin(0.5 * theta);
    }

    // Diagonal entries present in the reduced state, with their photon count.
    std::vector<std::pair<long, int>> diag;
    for (int dot = 0; dot < 2; ++dot) {
        for (int k = 0; k < photon_dim; ++k) {
            const int i = dot * photon_dim + k;
            if (const long p = gen.position(i, i); p >= 0) diag.emplace_back(p, k);
        }
    }
    const long p0_pos = gen.position(probe.g0, probe.g0);
    const long m_pos = c.n_max >= 1 ? gen.position(basis_index(c, DotState::Ground, 1),
                                                   basis_index(c, DotState::Ground, 1))
                                    : -1;

    StateVector x = gen.pack(rho0.op());
    auto at = [&x](long p) { return p >= 0 ? x[p].real() : 0.0; };
    auto photons = [&] {
        double n = 0.0;
        for (const auto& [p, k] : diag) n += k * x[p].real();
        return n;
    };
    auto trace_error = [&] {
        double tr = 0.0;
        for (const auto& [p, k] : diag) tr += x[p].real();
        return std::abs(tr - 1.0);
    };
    auto energy = [&](const EntryReader& r) {
        Complex e = 0.0;
        for (int i = 0; i < h_lab.outerSize(); ++i) {
            for (decltype(h_lab)::InnerIterator it(h_lab, i); it; ++it) {
                e += it.value() * r(static_cast<int>(it.col()), i);
            }
        }
        return e.real();
    };

    const long steps = grid.steps();
    const std::size_t expected = static_cast<std::size_t>(steps / grid.record_stride + 2);
    for (auto* v : {&traj.times, &traj.photon_number, &traj.manifold_photons, &traj.p_plus, &traj.p_minus,
                    &traj.p_zero, &traj.energy, &traj.trace_error, &traj.photon_integral,
                    &traj.p_zero_integral, &traj.manifold_integral}) {
        v->reserve(expected);
    }
    traj.p_pm.reserve(expected);

    double n_prev = photons();
    double p0_prev = at(p0_pos);
    double m_prev = at(m_pos);
    double n_int = 0.0, p0_int = 0.0, m_int = 0.0;
    const double nan = std::numeric_limits<double>::quiet_NaN();

    auto record = [&](long k, double trace_err) {
        const double t = static_cast<double>(k) * grid.dt;
        const EntryReader r{gen, x};
        traj.times.push_back(t);
        traj.photon_number.push_back(n_prev);
        traj.manifold_photons.push_back(m_prev);
        traj.p_zero.push_back(p0_prev);
        if (traj.has_dressed) {
            traj.p_plus.push_back(probe.p_plus(r));
            traj.p_minus.push_back(probe.p_minus(r));
            traj.p_pm.push_back(probe.p_pm(r));
        } else {
            traj.p_plus.push_back(nan);
            traj.p_minus.push_back(nan);
            traj.p_pm.push_back(Complex(nan, nan));
        }
        traj.energy.push_back(energy(r));
        traj.trace_error.push_back(trace_err);
        traj.photon_integral.push_back(n_int);
        traj.p_zero_integral.push_back(p0_int);
        traj.manifold_integral.push_back(m_int);
        const OperatorMatrix rho = gen.unpack(x);
        const double drift = hermiticity_drift(rho);
        traj.max_hermiticity_drift = std::max(traj.max_hermiticity_drift, drift);
        if (drift > kHermiticityDriftLimit) {
            std::ostringstream msg;
            msg << "Hermiticity drift " << drift << " exceeds " << kHermiticityDriftLimit << " at t = " << t;
            throw InvariantViolation("hermiticity", msg.str());
        }
        if (options.observer) options.observer(t, rho);
    };

    record(0, trace_error());

    Rk4<StateVector> stepper(x);
    auto rhs = [&gen](const StateVector& y, StateVector& dy) { gen.apply(y, dy); };
    const double half_dt = 0.5 * grid.dt;
    for (long k = 1; k <= steps; ++k) {
        stepper.step(x, grid.dt, rhs);
        const double trace_err = trace_error();
        if (trace_err > kTraceDriftLimit) {
            std::ostringstream msg;
            msg << "trace drift " << trace_err << " exceeds " << kTraceDriftLimit << " at t = "
                << static_cast<double>(k) * grid.dt;
            throw InvariantViolation("trace", msg.str());
        }
        const double n_cur = photons();
        const double p0_cur = at(p0_pos);
        const double m_cur = at(m_pos);
        n_int += half_dt * (n_prev + n_cur);
        p0_int += half_dt * (p0_prev + p0_cur);
        m_int += half_dt * (m_prev + m_cur);
        n_prev = n_cur;
        p0_prev = p0_cur;
        m_prev = m_cur;
        if (k % grid.record_stride == 0 || k == steps) record(k, trace_err);
    }

    traj.final_state = gen.unpack(x);
    return traj;
}

SteadyStateResult steady_state(const ModelParams& params, const DensityMatrix& rho0,
                               const SteadyStateOptions& options) {
    params.validate();
    if (!(params.kappa > 0.0)) throw InvalidArgument("steady_state: kappa must be > 0");
    if (rho0.dim() != params.dim()) throw DimensionMismatch("steady_state: initial state dimension mismatch");

    const Lindbladian lindbladian(params, natural_frame(params));
    const double dt = options.dt.value_or(default_time_step(params));
    check_stability(lindbladian, dt);
    const double horizon = options.horizon_rates / params.kappa;
    const long max_steps = static_cast<long>(std::ceil(horizon / dt - 1e-9));

    // Hermitize so that the reduced support is closed under transposition.
    const OperatorMatrix start = 0.5 * (rho0.op() + rho0.op().adjoint());
    const ReducedGenerator gen(lindbladian, start);
    StateVector x = gen.pack(start);
    StateVector deriv(x.size());
    Rk4<StateVector> stepper(x);
    auto rhs = [&gen](const StateVector& y, StateVector& dy) { gen.apply(y, dy); };
    auto trace = [&] {
        Complex tr = 0.0;
        for (int i = 0; i < params.dim(); ++i) {
            if (const long p = gen.position(i, i); p >= 0) tr += x[p];
        }
        return tr.real();
    };

    SteadyStateResult result;
    long k = 0;
    for (;;) {
        if (k % options.check_every == 0 || k == max_steps) {
            gen.apply(x, deriv);
            result.residual = deriv.norm();
            result.time = static_cast<double>(k) * dt;
            if (result.residual < options.residual_tol) {
                result.criterion = SteadyCriterion::Residual;
                break;
            }
            if (k >= max_steps) {
                result.criterion = SteadyCriterion::Horizon;
                result.flagged = result.residual > options.flag_residual;
                break;
            }
        }
        stepper.step(x, dt, rhs);
        ++k;
        if (std::abs(trace() - 1.0) > kTraceDriftLimit) {
            throw InvariantViolation("trace", "steady_state: trace drift exceeds 1e-6");
        }
    }
    result.rho = DensityMatrix::unchecked(gen.unpack(x));
    return result;
}

}  // namespace bornsim
