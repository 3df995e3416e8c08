// integrator.hpp: adaptive explicit Runge–Kutta 8(5,3) (Dormand–Prince) for
// complex first-order systems y' = f(t, y).
//
// The state is never renormalized; callers use it for norm-preserving
// Schrödinger problems and watch the norm drift themselves.

#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>

namespace fockpass {

struct IntegratorOptions {
    double rtol{1e-9};
    double atol{1e-11};
    double h_max{0.0};       // 0: unbounded
    std::size_t max_steps{200'000'000};
};

struct IntegratorStats {
    std::size_t accepted{0};
    std::size_t rejected{0};
    std::size_t evaluations{0};
};

class Rk853 {
public:
    using State = Eigen::VectorXcd;
    using Rhs = std::function<void(double t, const State& y, State& dydt)>;
    using Observer = std::function<void(double t, const State& y)>;

    Rk853(Rhs rhs, IntegratorOptions options);

    void reset(double t0, State y0);

    // Adaptive integration to exactly t_end (t_end >= current time). The
    // observer, if set, sees every accepted step. Throws NumericalError on
    // step-size underflow (with the time of failure) or when max_steps is
    // exhausted.
    void advance_to(double t_end);

    // One step of fixed size, without error control.
    void fixed_step(double h);

    void set_observer(Observer observer) { observer_ = std::move(observer); }

    double time() const noexcept { return t_; }
    const State& state() const noexcept { return y_; }
    const IntegratorStats& stats() const noexcept { return stats_; }

private:
    // Computes the 8th-order solution for step h into y_new_ and the scaled
    // error estimate (<= 1 accepts).
    double attempt(double h);
    double initial_step(double span);

    Rhs rhs_;
    IntegratorOptions options_;
    Observer observer_;

    double t_{0.0};
    double h_{0.0};
    bool have_k1_{false};
    State y_, y_new_, tmp_;
    State k1_, k2_, k3_, k4_, k5_, k6_, k7_, k8_, k9_, k10_, k11_, k12_;
    IntegratorStats stats_;
};

}  // namespace fockpass
