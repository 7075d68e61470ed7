#include "epend/averaging.hpp"

#include <algorithm>
#include <tuple>

#include "epend/error.hpp"

namespace epend {

namespace {

// (2/M)·Σ y_j (cos, sin)(2πj/M): the trapezoid rule on uniform periodic samples.
std::pair<double, double> first_harmonic(const std::vector<double>& y)
{
    const auto m = static_cast<double>(y.size());
    double c = 0.0, s = 0.0;
    for (std::size_t j = 0; j < y.size(); ++j) {
        const double a = two_pi * static_cast<double>(j) / m;
        c += y[j] * std::cos(a);
        s += y[j] * std::sin(a);
    }
    return {2.0 * c / m, 2.0 * s / m};
}

// The first Fourier coefficient of the periodic piecewise-linear interpolant
// equals the sample DFT damped by sinc²(π/M).
std::pair<double, double> interpolant_harmonic(const std::vector<double>& y)
{
    const double x = pi / static_cast<double>(y.size());
    const double sinc = std::sin(x) / x;
    auto [c, s] = first_harmonic(y);
    return {sinc * sinc * c, sinc * sinc * s};
}

}  // namespace

FourierModes fourier_modes(const ForcingSpec& forcing, int nodes)
{
    if (nodes < 256) throw Error(ErrorKind::invalid_argument, "fourier_modes needs at least 256 nodes");
    FourierModes m;
    if (const auto* sampled = std::get_if<ForcingSpec::Sampled>(&forcing.form())) {
        std::tie(m.fxc, m.fxs) = interpolant_harmonic(sampled->fx);
        std::tie(m.fyc, m.fys) = interpolant_harmonic(sampled->fy);
        return m;
    }
    std::vector<double> fx(nodes), fy(nodes);
    const double dt = forcing.period() / nodes;
    for (int j = 0; j < nodes; ++j) {
        fx[j] = forcing.fx(j * dt);
        fy[j] = forcing.fy(j * dt);
    }
    std::tie(m.fxc, m.fxs) = first_harmonic(fx);
    std::tie(m.fyc, m.fys) = first_harmonic(fy);
    return m;
}

NormalizedForcing normalize_modes(const FourierModes& modes, double omega)
{
    if (!(omega > 0.0)) throw Error(ErrorKind::invalid_argument, "omega must be positive");
    const double vertical = std::hypot(modes.fyc, modes.fys);
    const double scale = std::max({1.0, std::abs(modes.fxc), std::abs(modes.fxs)});
    if (!(vertical > 1e-14 * scale))
        throw Error(ErrorKind::no_vertical_harmonic, "no-vertical-harmonic: first vertical Fourier mode vanishes");

    // f(t + τ) rotates the (cos, sin) pair by ωτ; ωτ = atan2(f_y^s, f_y^c) zeroes f_y^s.
    double shift_angle = std::atan2(modes.fys, modes.fyc);
    if (shift_angle < 0.0) shift_angle += two_pi;
    if (shift_angle >= two_pi) shift_angle = 0.0;
    const double c = std::cos(shift_angle), s = std::sin(shift_angle);
    const double fxc = modes.fxc * c + modes.fxs * s;
    const double fxs = modes.fxs * c - modes.fxc * s;

    NormalizedForcing out;
    out.p = omega * vertical;
    out.eps = omega * std::hypot(fxc, fxs) / out.p;
    out.alpha = out.eps == 0.0 ? 0.0 : std::atan2(fxs, fxc);
    if (out.alpha == -pi) out.alpha = pi;
    out.time_shift = shift_angle / omega;
    return out;
}

namespace {

// Positive-direction form: γ + A sin(φ + β) with A sin(φ + β) = (p/2ω)[a sinφ + b cosφ].
struct SteadyForm {
    double amplitude, beta;
};

SteadyForm steady_form(double p, double eps, double alpha, double omega)
{
    const double a = 1.0 - eps * std::sin(alpha);
    const double b = eps * std::cos(alpha);
    return {p / (2.0 * omega) * std::hypot(a, b), std::atan2(b, a)};
}

void check_direction(int direction)
{
    if (direction != 1 && direction != -1) throw Error(ErrorKind::invalid_argument, "direction must be +1 or -1");
}

double wrap_half_open(double x)
{
    // (−π, π]
    const double r = wrap_to_pi(x);
    return r == -pi ? pi : r;
}

}  // namespace

double averaged_residual(double phi, double p, double eps, double alpha, double gamma, double omega, int direction)
{
    check_direction(direction);
    // Negative rotations: φ = −φ̃ with φ̃ solving the positive form for −ε.
    const double e = direction > 0 ? eps : -eps;
    const double x = direction > 0 ? phi : -phi;
    const double a = 1.0 - e * std::sin(alpha);
    const double b = e * std::cos(alpha);
    return gamma + p / (2.0 * omega) * (a * std::sin(x) + b * std::cos(x));
}

AveragedEquilibria averaged_equilibria(double p, double eps, double alpha, double gamma, double omega, int direction)
{
    check_direction(direction);
    if (!(omega > 0.0)) throw Error(ErrorKind::invalid_argument, "omega must be positive");
    const SteadyForm f = steady_form(p, direction > 0 ? eps : -eps, alpha, omega);
    AveragedEquilibria out;
    out.amplitude = f.amplitude;
    if (f.amplitude < gamma || f.amplitude == 0.0) return out;
    // sin(φ + β) = −γ/A; the root with cos(φ + β) > 0 is the stable one.
    const double root = std::asin(std::clamp(-gamma / f.amplitude, -1.0, 1.0));
    double stable = root - f.beta;
    double saddle = pi - root - f.beta;
    if (direction < 0) {
        stable = -stable;
        saddle = -saddle;
    }
    out.exists = true;
    out.phi0_stable = wrap_half_open(stable);
    out.phi0_saddle = wrap_half_open(saddle);
    return out;
}

FoldPrediction fold_prediction(double gamma, double eps, double alpha, double omega)
{
    if (!(omega > 0.0) || gamma < 0.0) throw Error(ErrorKind::invalid_argument, "need omega > 0 and gamma >= 0");
    auto branch = [&](double sign) -> std::optional<double> {
        const double q = 1.0 + eps * eps - sign * 2.0 * eps * std::sin(alpha);
        if (q <= 1e-15) return std::nullopt;
        return 2.0 * gamma * omega / std::sqrt(q);
    };
    return {branch(+1.0), branch(-1.0)};
}

AveragedPrediction averaged_prediction(double gamma, double eps, double alpha, double omega, std::optional<double> p)
{
    AveragedPrediction out;
    out.fold = fold_prediction(gamma, eps, alpha, omega);
    if (p) {
        out.positive = averaged_equilibria(*p, eps, alpha, gamma, omega, +1);
        out.negative = averaged_equilibria(*p, eps, alpha, gamma, omega, -1);
    }
    return out;
}

}  // namespace epend
