#pragma once

#include <array>
#include <cstddef>

namespace lrq {

// Classical fixed-step 4th-order Runge-Kutta over small static states.
// Fixed step keeps outputs bit-for-bit reproducible across runs.

template <std::size_t N>
using Rk4State = std::array<double, N>;

namespace detail {

template <std::size_t N>
Rk4State<N> axpy(const Rk4State<N>& y, double a, const Rk4State<N>& k) {
    Rk4State<N> out{};
    for (std::size_t i = 0; i < N; ++i) out[i] = y[i] + a * k[i];
    return out;
}

} // namespace detail

/// Integrate dy/dt = rhs(t, y) from t0 over n_steps uniform steps of size dt.
/// `observe(step_index, t, y)` is called for every accepted point, including
/// the initial condition at step 0.
template <std::size_t N, typename Rhs, typename Observer>
Rk4State<N> rk4_integrate(Rhs&& rhs, Rk4State<N> y, double t0, double dt, int n_steps,
                          Observer&& observe) {
    observe(0, t0, y);
    for (int s = 0; s < n_steps; ++s) {
        const double t = t0 + s * dt;
        const Rk4State<N> k1 = rhs(t, y);
        const Rk4State<N> k2 = rhs(t + dt / 2, detail::axpy(y, dt / 2, k1));
        const Rk4State<N> k3 = rhs(t + dt / 2, detail::axpy(y, dt / 2, k2));
        const Rk4State<N> k4 = rhs(t + dt, detail::axpy(y, dt, k3));
        for (std::size_t i = 0; i < N; ++i)
            y[i] += dt / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
        observe(s + 1, t0 + (s + 1) * dt, y);
    }
    return y;
}

template <std::size_t N, typename Rhs>
Rk4State<N> rk4_integrate(Rhs&& rhs, Rk4State<N> y, double t0, double dt, int n_steps) {
    return rk4_integrate(
        static_cast<Rhs&&>(rhs), y, t0, dt, n_steps,
        [](int, double, const Rk4State<N>&) {});
}

} // namespace lrq
