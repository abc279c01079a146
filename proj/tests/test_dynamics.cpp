#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <numbers>
#include <random>
#include <unsupported/Eigen/KroneckerProduct>

#include "bornsim/dynamics.hpp"
#include "bornsim/observables.hpp"
#include "support.hpp"

using namespace bornsim;
using testsupport::max_abs;

namespace {

constexpr double kPi = std::numbers::pi;

ModelParams fig1_params() { return ModelParams{}; }

ModelParams rabi_params(int n_max) {
    ModelParams p;
    p.coupling = CouplingKind::Rabi;
    p.lambda = 0.5;
    p.kappa = 0.05;
    p.cutoff.n_max = n_max;
    return p;
}

// Dissipator straight from its definition: (2 X r X^+ - X^+X r - r X^+X) / 2.
OperatorMatrix dissipator(const OperatorMatrix& x, const OperatorMatrix& r) {
    const OperatorMatrix xdx = x.adjoint() * x;
    return 0.5 * (2.0 * x * r * x.adjoint() - xdx * r - r * xdx);
}

OperatorMatrix reference_rhs(const OperatorMatrix& r, const ModelParams& p) {
    const OperatorMatrix h = hamiltonian(p);
    const OperatorMatrix a = photon_annihilation(p.cutoff);
    const Complex i(0.0, 1.0);
    return -i * (h * r - r * h) + p.kappa * (1 + p.nbar) * dissipator(a, r) +
           p.kappa * p.nbar * dissipator(OperatorMatrix(a.adjoint()), r);
}

// Column-major vec: vec(A X B) = (B^T kron A) vec(X).
Eigen::MatrixXcd reference_liouvillian(const ModelParams& p) {
    const int d = p.dim();
    const OperatorMatrix id = OperatorMatrix::Identity(d, d);
    const OperatorMatrix h = hamiltonian(p);
    const OperatorMatrix a = photon_annihilation(p.cutoff);
    const Complex i(0.0, 1.0);
    auto diss = [&](const OperatorMatrix& x) -> Eigen::MatrixXcd {
        const OperatorMatrix xdx = x.adjoint() * x;
        const OperatorMatrix xc = x.conjugate();
        const OperatorMatrix xdx_t = xdx.transpose();
        return Eigen::MatrixXcd(Eigen::kroneckerProduct(xc, x)) -
               0.5 * Eigen::MatrixXcd(Eigen::kroneckerProduct(id, xdx)) -
               0.5 * Eigen::MatrixXcd(Eigen::kroneckerProduct(xdx_t, id));
    };
    const OperatorMatrix h_t = h.transpose();
    Eigen::MatrixXcd l = -i * (Eigen::MatrixXcd(Eigen::kroneckerProduct(id, h)) -
                               Eigen::MatrixXcd(Eigen::kroneckerProduct(h_t, id)));
    l += p.kappa * (1 + p.nbar) * diss(a);
    if (p.nbar > 0) l += p.kappa * p.nbar * diss(OperatorMatrix(a.adjoint()));
    return l;
}

// Kernel of the Liouvillian with unit trace, by replacing one equation.
OperatorMatrix reference_steady_state(const ModelParams& p) {
    const int d = p.dim();
    Eigen::MatrixXcd l = reference_liouvillian(p);
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(d * d);
    l.row(0).setZero();
    for (int k = 0; k < d; ++k) l(0, k * d + k) = 1.0;
    rhs[0] = 1.0;
    const Eigen::VectorXcd v = l.partialPivLu().solve(rhs);
    return Eigen::Map<const OperatorMatrix>(v.data(), d, d);
}

// Plain dense RK4 on the full matrix, lab frame.
OperatorMatrix reference_rk4(OperatorMatrix r, const ModelParams& p, double dt, long steps) {
    for (long k = 0; k < steps; ++k) {
        const OperatorMatrix k1 = reference_rhs(r, p);
        const OperatorMatrix k2 = reference_rhs(r + 0.5 * dt * k1, p);
        const OperatorMatrix k3 = reference_rhs(r + 0.5 * dt * k2, p);
        const OperatorMatrix k4 = reference_rhs(r + dt * k3, p);
        r += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return r;
}

}  // namespace

TEST_CASE("lindblad_rhs matches the dissipator definition") {
    std::mt19937 rng(1);
    for (int trial = 0; trial < 20; ++trial) {
        ModelParams p;
        p.coupling = trial % 2 ? CouplingKind::Rabi : CouplingKind::JC;
        p.lambda = 0.3 * std::uniform_real_distribution<double>(0, 1)(rng);
        p.kappa = 0.2 * std::uniform_real_distribution<double>(0, 1)(rng);
        p.nbar = trial % 3 ? 0.0 : 0.4;
        p.E_g = -1.0 + 0.3 * std::uniform_real_distribution<double>(-1, 1)(rng);
        p.cutoff.n_max = 1 + trial % 5;
        const OperatorMatrix r = testsupport::random_density(rng, p.dim());
        const OperatorMatrix out = lindblad_rhs(DensityMatrix(r), p);
        CHECK(max_abs(out - reference_rhs(r, p)) < 1e-12);
        CHECK(std::abs(out.trace()) < 1e-12);
        CHECK(is_hermitian(out, 1e-14));
    }
}

TEST_CASE("superoperator agrees with apply") {
    std::mt19937 rng(2);
    ModelParams p = rabi_params(4);
    p.nbar = 0.3;
    for (Frame f : {Frame::Lab}) {
        const Lindbladian l(p, f);
        const OperatorMatrix r = testsupport::random_density(rng, p.dim());
        OperatorMatrix rt = r.transpose();  // row-major vec of r
        const Eigen::VectorXcd v = l.superoperator() * Eigen::Map<const Eigen::VectorXcd>(rt.data(), rt.size());
        OperatorMatrix out = Eigen::Map<const OperatorMatrix>(v.data(), p.dim(), p.dim()).transpose();
        CHECK(max_abs(out - l(r)) < 1e-13);
    }
}

TEST_CASE("lindblad_rhs examples") {
    const ModelParams p = fig1_params();
    const DensityMatrix ground = pure_density(fock_state(p.cutoff, DotState::Ground, 0));
    CHECK(max_abs(lindblad_rhs(ground, p)) == 0.0);

    std::mt19937 rng(4);
    ModelParams closed = p;
    closed.kappa = 0.0;
    closed.lambda = 0.2;
    const DensityMatrix pure = pure_density(testsupport::random_unit_vector(rng, p.dim()));
    const OperatorMatrix d = lindblad_rhs(pure, closed);
    CHECK(std::abs(2.0 * (pure.op() * d).trace()) < 1e-14);

    ModelParams bigger = p;
    bigger.cutoff.n_max = 3;
    CHECK_THROWS_AS(lindblad_rhs(ground, bigger), DimensionMismatch);
}

TEST_CASE("time grid") {
    TimeGrid g{1.0, 0.3, 1};
    CHECK(g.steps() == 4);
    g = TimeGrid{1.0, 0.25, 1};
    CHECK(g.steps() == 4);
    CHECK_THROWS_AS((TimeGrid{1.0, 0.0, 1}.validate()), InvalidArgument);
    CHECK_THROWS_AS((TimeGrid{0.1, 0.2, 1}.validate()), InvalidArgument);
}

TEST_CASE("stability bound is enforced with a suggested step") {
    ModelParams p = rabi_params(8);
    const DensityMatrix rho = initial_state(1.0, p);
    const double limit = 0.05 / Lindbladian(p).generator_norm();
    try {
        (void)evolve(rho, p, TimeGrid{1.0, 2 * limit, 1});
        FAIL("expected StabilityError");
    } catch (const StabilityError& e) {
        CHECK(e.suggested_dt() == doctest::Approx(limit));
    }
    CHECK(default_time_step(p) == doctest::Approx(std::min(0.01, limit)));
}

TEST_CASE("closed-system Rabi oscillation") {
    ModelParams p = fig1_params();
    p.kappa = 0.0;
    const Trajectory t = evolve(initial_state(1.0, p), p, TimeGrid{400.0, 0.01, 100});
    double worst = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double s = std::sin(p.lambda * t.times[i]);
        worst = std::max(worst, std::abs(t.photon_number[i] - s * s));
    }
    CHECK(worst < 1e-6);
    CHECK(std::abs(accumulated_energy(t)) < 1e-8);
}

TEST_CASE("Fig. 1 photon number at a quarter period") {
    const ModelParams p = fig1_params();
    const double tq = kPi / (2 * p.lambda);
    const Trajectory t = evolve(initial_state(1.0, p), p, TimeGrid{tq, 0.01, 1000000});
    CHECK(t.times.back() == doctest::Approx(tq).epsilon(1e-4));
    CHECK(std::abs(t.photon_number.back() - std::exp(-p.kappa * tq / 2)) < 0.03);
    CHECK(std::exp(-p.kappa * tq / 2) == doctest::Approx(0.9245).epsilon(1e-4));
}

TEST_CASE("dark initial state stays dark") {
    const ModelParams p = fig1_params();
    const Trajectory t = evolve(initial_state(0.0, p), p, TimeGrid{2000.0, 0.01, 1000});
    for (std::size_t i = 0; i < t.size(); ++i) {
        CHECK(t.photon_number[i] == 0.0);
        CHECK(t.p_zero[i] == 1.0);
    }
    CHECK(measured_probability_series(t).back() == 0.0);
}

TEST_CASE("trajectory invariants on random manifold states") {
    std::mt19937 rng(9);
    for (int trial = 0; trial < 6; ++trial) {
        ModelParams p = fig1_params();
        p.E_g = -1.0 + 0.1 * (trial % 3);
        p.kappa = 0.01;
        p.lambda = 0.02;
        const DensityMatrix rho0(testsupport::random_density(rng, p.dim()));
        double min_eig = 0.0;
        EvolveOptions opts;
        opts.observer = [&](double, const OperatorMatrix& r) {
            min_eig = std::min(min_eig, Eigen::SelfAdjointEigenSolver<OperatorMatrix>(r).eigenvalues()[0]);
        };
        const Trajectory t = evolve(rho0, p, TimeGrid{500.0, 0.01, 500}, opts);
        CHECK(min_eig >= -1e-6);
        for (std::size_t i = 0; i < t.size(); ++i) {
            CHECK(t.trace_error[i] <= 1e-6);
            for (double v : {t.p_plus[i], t.p_minus[i], t.p_zero[i]}) {
                CHECK(v >= -1e-6);
                CHECK(v <= 1 + 1e-6);
            }
        }
        CHECK(t.max_hermiticity_drift <= 1e-10);
        const auto counter = measured_probability_series(t);
        CHECK(std::is_sorted(counter.begin(), counter.end()));
    }
}

TEST_CASE("particle conservation identity") {
    const ModelParams p = fig1_params();
    const Trajectory t = evolve(initial_state(1.0, p), p, TimeGrid{3000.0, 0.01, 10});
    const auto dp0 = time_derivative(t.times, t.p_zero);
    double worst = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) worst = std::max(worst, std::abs(dp0[i] - p.kappa * t.photon_number[i]));
    CHECK(worst <= 1e-6);
}

TEST_CASE("co-rotating frame reproduces the lab frame") {
    ModelParams p = fig1_params();
    p.E_g = -0.9;
    p.lambda = 0.05;
    p.kappa = 0.02;
    p.nbar = 0.3;
    p.cutoff.n_max = 20;
    const DensityMatrix rho0 = initial_state(0.6, p);
    EvolveOptions lab;
    lab.frame = Frame::Lab;
    const TimeGrid g{60.0, 0.05 / Lindbladian(p, Frame::Lab).generator_norm(), 100};
    const Trajectory a = evolve(rho0, p, g, lab);
    const Trajectory b = evolve(rho0, p, g);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(std::abs(a.photon_number[i] - b.photon_number[i]) < 1e-9);
        CHECK(std::abs(a.energy[i] - b.energy[i]) < 1e-9);
        CHECK(std::abs(a.p_plus[i] - b.p_plus[i]) < 1e-9);
    }
    CHECK_THROWS_AS(Lindbladian(rabi_params(3), Frame::CoRotating), InvalidArgument);
}

TEST_CASE("reduced integration equals dense RK4 on the full matrix") {
    std::mt19937 rng(13);
    ModelParams p = rabi_params(5);
    p.nbar = 0.1;
    const double dt = default_time_step(p);
    const long steps = 400;
    ModelParams cold = p;
    cold.nbar = 0.0;
    for (const OperatorMatrix& r0 : {initial_state(0.4, cold).op(), testsupport::random_density(rng, p.dim())}) {
        const Trajectory t = evolve(DensityMatrix(r0), p, TimeGrid{dt * steps, dt, steps});
        CHECK(max_abs(t.final_state - reference_rk4(r0, p, dt, steps)) < 1e-12);
    }
}

TEST_CASE("step halving") {
    const ModelParams p = fig1_params();
    const DensityMatrix rho0 = initial_state(1.0, p);
    const Trajectory a = evolve(rho0, p, TimeGrid{1000.0, 0.01, 100});
    const Trajectory b = evolve(rho0, p, TimeGrid{1000.0, 0.005, 200});
    REQUIRE(a.size() == b.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        worst = std::max({worst, std::abs(a.photon_number[i] - b.photon_number[i]),
                          std::abs(a.p_zero[i] - b.p_zero[i]), std::abs(a.energy[i] - b.energy[i])});
    }
    CHECK(worst < 1e-7);
}

TEST_CASE("steady state: zero-temperature JC relaxes to the dark state") {
    std::mt19937 rng(17);
    ModelParams p = fig1_params();
    p.lambda = 0.05;
    p.kappa = 0.05;
    p.cutoff.n_max = 3;
    for (int trial = 0; trial < 3; ++trial) {
        const DensityMatrix rho0(testsupport::random_density(rng, p.dim()));
        const SteadyStateResult s = steady_state(p, rho0);
        OperatorMatrix dark = OperatorMatrix::Zero(p.dim(), p.dim());
        dark(0, 0) = 1.0;
        CHECK(max_abs(s.rho.op() - dark) < 1e-6);
        CHECK_FALSE(s.flagged);
    }
    ModelParams closed = p;
    closed.kappa = 0.0;
    CHECK_THROWS_AS(steady_state(closed, initial_state(1.0, closed)), InvalidArgument);
}

TEST_CASE("steady state matches the Liouvillian kernel") {
    ModelParams rabi = rabi_params(12);
    const SteadyStateResult s = steady_state(rabi, initial_state(1.0, rabi));
    CHECK(s.criterion == SteadyCriterion::Residual);
    CHECK(s.residual < 1e-9);
    const OperatorMatrix ref = reference_steady_state(rabi);
    CHECK(max_abs(s.rho.op() - ref) < 1e-6);
    CHECK(photon_number(s.rho) == doctest::Approx(0.1618).epsilon(1e-3));

    ModelParams warm = fig1_params();
    warm.kappa = 0.01;
    warm.nbar = 0.2;
    warm.cutoff.n_max = 24;
    const SteadyStateResult w = steady_state(warm, initial_state(0.3, warm));
    const double n_ref = photon_number(DensityMatrix::unchecked(reference_steady_state(warm)));
    CHECK(std::abs(photon_number(w.rho) - n_ref) < 1e-4);
    CHECK(std::abs(photon_number(w.rho) - 0.2) < 1e-2);
}

TEST_CASE("steady state flags a short horizon") {
    ModelParams p = fig1_params();
    SteadyStateOptions opts;
    opts.horizon_rates = 0.1;
    const SteadyStateResult s = steady_state(p, initial_state(1.0, p), opts);
    CHECK(s.criterion == SteadyCriterion::Horizon);
    CHECK(s.flagged);
    CHECK(s.time == doctest::Approx(100.0));
}
