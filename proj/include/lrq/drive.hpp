#pragma once

#include "lrq/errors.hpp"
#include "lrq/linalg.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace lrq {

// Named parametric families for time-dependent Hamiltonian coefficients.
// Text form (used by scenario configs):
//   constant{c}
//   linear{c0,c1}                ->  c0 + c1*t
//   sinusoid{amp,freq,phase,off} ->  amp*sin(freq*t + phase) + off   (freq in rad/time)
//   tabulated{t0 t1 ...; v0 v1 ...}  with linear interpolation, clamped at the ends

struct ConstantDrive {
    double value = 0.0;
};

struct LinearDrive {
    double intercept = 0.0;
    double slope = 0.0;
};

struct SinusoidDrive {
    double amplitude = 0.0;
    double angular_freq = 0.0;
    double phase = 0.0;
    double offset = 0.0;
};

struct TabulatedDrive {
    std::vector<double> t;
    std::vector<double> v;
};

class ScalarDrive {
public:
    ScalarDrive() : fn_(ConstantDrive{}) {}

    static ScalarDrive constant(double c) { return ScalarDrive(ConstantDrive{c}); }
    static ScalarDrive linear(double c0, double c1) { return ScalarDrive(LinearDrive{c0, c1}); }
    static ScalarDrive sinusoid(double amp, double freq, double phase, double offset) {
        return ScalarDrive(SinusoidDrive{amp, freq, phase, offset});
    }
    static ScalarDrive tabulated(std::vector<double> t, std::vector<double> v) {
        if (t.size() != v.size() || t.size() < 2)
            throw config_error("tabulated drive needs >= 2 samples with matching t/v lengths");
        if (!std::is_sorted(t.begin(), t.end()))
            throw config_error("tabulated drive times must be strictly increasing");
        for (std::size_t i = 1; i < t.size(); ++i)
            if (t[i] == t[i - 1]) throw config_error("tabulated drive times must be strictly increasing");
        return ScalarDrive(TabulatedDrive{std::move(t), std::move(v)});
    }

    /// Parse the text form, e.g. "sinusoid{0.1,0.5,0,1.2}".
    static ScalarDrive parse(std::string_view text);

    double operator()(double t) const {
        return std::visit([t](const auto& f) { return eval(f, t); }, fn_);
    }

    /// Analytic time derivative of the family (tabulated: piecewise slope).
    double derivative(double t) const {
        return std::visit([t](const auto& f) { return deriv(f, t); }, fn_);
    }

    /// True if the drive is finite on a probe grid over [t0, t1].
    bool finite_on(double t0, double t1, int probes = 257) const {
        for (int i = 0; i <= probes; ++i) {
            const double t = t0 + (t1 - t0) * i / probes;
            if (!std::isfinite((*this)(t))) return false;
        }
        return true;
    }

private:
    template <typename F>
    explicit ScalarDrive(F f) : fn_(std::move(f)) {}

    static double eval(const ConstantDrive& f, double) { return f.value; }
    static double eval(const LinearDrive& f, double t) { return f.intercept + f.slope * t; }
    static double eval(const SinusoidDrive& f, double t) {
        return f.amplitude * std::sin(f.angular_freq * t + f.phase) + f.offset;
    }
    static double eval(const TabulatedDrive& f, double t) {
        if (t <= f.t.front()) return f.v.front();
        if (t >= f.t.back()) return f.v.back();
        const auto it = std::upper_bound(f.t.begin(), f.t.end(), t);
        const std::size_t i = static_cast<std::size_t>(it - f.t.begin());
        const double w = (t - f.t[i - 1]) / (f.t[i] - f.t[i - 1]);
        return f.v[i - 1] + w * (f.v[i] - f.v[i - 1]);
    }

    static double deriv(const ConstantDrive&, double) { return 0.0; }
    static double deriv(const LinearDrive& f, double) { return f.slope; }
    static double deriv(const SinusoidDrive& f, double t) {
        return f.amplitude * f.angular_freq * std::cos(f.angular_freq * t + f.phase);
    }
    static double deriv(const TabulatedDrive& f, double t) {
        if (t < f.t.front() || t > f.t.back()) return 0.0; // clamped region
        std::size_t i = static_cast<std::size_t>(
            std::upper_bound(f.t.begin(), f.t.end(), t) - f.t.begin());
        if (i == 0) i = 1; // t at the left edge: first interval slope
        if (i == f.t.size()) i = f.t.size() - 1;
        return (f.v[i] - f.v[i - 1]) / (f.t[i] - f.t[i - 1]);
    }

    std::variant<ConstantDrive, LinearDrive, SinusoidDrive, TabulatedDrive> fn_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

inline double parse_double(std::string_view token, std::string_view context) {
    token = trim(token);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size())
        throw config_error("cannot parse number '" + std::string(token) + "' in " + std::string(context));
    return value;
}

inline std::vector<double> parse_double_list(std::string_view text, char sep, std::string_view context) {
    std::vector<double> out;
    while (!text.empty()) {
        const auto pos = text.find(sep);
        const std::string_view tok = trim(text.substr(0, pos));
        if (!tok.empty()) out.push_back(parse_double(tok, context));
        if (pos == std::string_view::npos) break;
        text.remove_prefix(pos + 1);
    }
    return out;
}

} // namespace detail

inline ScalarDrive ScalarDrive::parse(std::string_view text) {
    const std::string_view full = detail::trim(text);
    const auto open = full.find('{');
    if (open == std::string_view::npos || full.back() != '}')
        throw config_error("drive must look like name{args}: '" + std::string(full) + "'");
    const std::string_view name = detail::trim(full.substr(0, open));
    const std::string_view args = full.substr(open + 1, full.size() - open - 2);

    if (name == "constant") {
        const auto v = detail::parse_double_list(args, ',', full);
        if (v.size() != 1) throw config_error("constant{} takes 1 argument: '" + std::string(full) + "'");
        return constant(v[0]);
    }
    if (name == "linear") {
        const auto v = detail::parse_double_list(args, ',', full);
        if (v.size() != 2) throw config_error("linear{} takes 2 arguments: '" + std::string(full) + "'");
        return linear(v[0], v[1]);
    }
    if (name == "sinusoid") {
        const auto v = detail::parse_double_list(args, ',', full);
        if (v.size() != 4) throw config_error("sinusoid{} takes 4 arguments: '" + std::string(full) + "'");
        return sinusoid(v[0], v[1], v[2], v[3]);
    }
    if (name == "tabulated") {
        const auto semi = args.find(';');
        if (semi == std::string_view::npos)
            throw config_error("tabulated{} wants 't0 t1 ...; v0 v1 ...': '" + std::string(full) + "'");
        auto ts = detail::parse_double_list(args.substr(0, semi), ' ', full);
        auto vs = detail::parse_double_list(args.substr(semi + 1), ' ', full);
        return tabulated(std::move(ts), std::move(vs));
    }
    throw config_error("unknown drive family '" + std::string(name) + "'");
}

/// Time-dependent coefficients of the multiphoton Jaynes-Cummings
/// Hamiltonian. The complex coupling is carried as two real families.
/// The detuning delta(t) = k*omega(t) - omega0(t) is always derived.
struct DriveParams {
    ScalarDrive omega;
    ScalarDrive omega0;
    ScalarDrive g_re;
    ScalarDrive g_im;

    complexd g(double t) const { return {g_re(t), g_im(t)}; }
    double delta(double t, int k) const { return k * omega(t) - omega0(t); }

    bool finite_on(double t0, double t1) const {
        return omega.finite_on(t0, t1) && omega0.finite_on(t0, t1) &&
               g_re.finite_on(t0, t1) && g_im.finite_on(t0, t1);
    }
};

/// Spin-model drive c(t) = c0 * (sin th cos ph, sin th sin ph, cos th).
struct SpinDrive {
    ScalarDrive c0;
    ScalarDrive theta;
    ScalarDrive phi;

    bool finite_on(double t0, double t1) const {
        return c0.finite_on(t0, t1) && theta.finite_on(t0, t1) && phi.finite_on(t0, t1);
    }
};

} // namespace lrq
