#pragma once

#include <span>
#include <vector>

namespace lrq {

// Composite Simpson on uniformly sampled integrands. An odd trailing panel
// falls back to the trapezoid rule, so any sample count is accepted.

/// Cumulative integral I[j] = int_{t0}^{t0 + j*dt} f dt over the sample grid.
/// Even j accumulate Simpson pairs; odd j add a trapezoid tail panel.
inline std::vector<double> cumulative_simpson(std::span<const double> f, double dt) {
    const std::size_t n = f.empty() ? 0 : f.size() - 1;
    std::vector<double> out(n + 1, 0.0);
    for (std::size_t j = 1; j <= n; ++j) {
        if (j % 2 == 0)
            out[j] = out[j - 2] + dt / 3.0 * (f[j - 2] + 4.0 * f[j - 1] + f[j]);
        else
            out[j] = out[j - 1] + dt / 2.0 * (f[j - 1] + f[j]);
    }
    return out;
}

/// Definite integral over the whole sample grid; identical panel logic to
/// cumulative_simpson, so simpson(f, dt) == cumulative_simpson(f, dt).back().
inline double simpson(std::span<const double> f, double dt) {
    const std::size_t n = f.empty() ? 0 : f.size() - 1;
    double even_acc = 0.0; // value at the last even index reached
    double prev_even = 0.0;
    double out = 0.0;
    for (std::size_t j = 1; j <= n; ++j) {
        if (j % 2 == 0) {
            even_acc = prev_even + dt / 3.0 * (f[j - 2] + 4.0 * f[j - 1] + f[j]);
            prev_even = even_acc;
            out = even_acc;
        } else {
            out = prev_even + dt / 2.0 * (f[j - 1] + f[j]);
        }
    }
    return out;
}

} // namespace lrq
