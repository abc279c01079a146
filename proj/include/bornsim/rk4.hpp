#pragma once

namespace bornsim {

/// Classical fourth-order Runge-Kutta step for autonomous linear-algebra
/// states (Eigen matrices and vectors). `rhs(y, dy)` writes dy/dt into dy.
/// Scratch storage is kept between steps.
template <class State>
class Rk4 {
public:
    Rk4() = default;
    explicit Rk4(const State& shape) : k1_(shape), k2_(shape), k3_(shape), k4_(shape), tmp_(shape) {}

    template <class Rhs>
    void step(State& y, double dt, Rhs&& rhs) {
        rhs(y, k1_);
        tmp_ = y + (0.5 * dt) * k1_;
        rhs(tmp_, k2_);
        tmp_ = y + (0.5 * dt) * k2_;
        rhs(tmp_, k3_);
        tmp_ = y + dt * k3_;
        rhs(tmp_, k4_);
        y += (dt / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
    }

private:
    State k1_, k2_, k3_, k4_, tmp_;
};

}  // namespace bornsim
