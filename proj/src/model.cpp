#include "epend/model.hpp"

#include <string>

#include "epend/error.hpp"

namespace epend {

namespace {

void require(bool ok, const std::string& what)
{
    if (!ok) throw Error(ErrorKind::invalid_argument, what);
}

void require_state(const State& s)
{
    if (!s.finite()) throw Error(ErrorKind::invalid_state, "invalid state");
}

}  // namespace

PendulumParams validated(const PendulumParams& params)
{
    require(std::isfinite(params.gamma) && std::isfinite(params.p) && std::isfinite(params.omega) &&
                std::isfinite(params.e) && std::isfinite(params.alpha),
            "parameters must be finite");
    require(params.omega > 0.0, "omega must be positive");
    require(params.gamma >= 0.0, "gamma must be non-negative");
    require(params.p >= 0.0, "p must be non-negative");
    PendulumParams out = params;
    if (out.alpha < -pi || out.alpha > pi) out.alpha = wrap_to_pi(out.alpha);
    return out;
}

ForcingSpec ForcingSpec::elliptic(double p, double e, double alpha, double omega)
{
    require(omega > 0.0 && std::isfinite(omega), "omega must be positive");
    require(std::isfinite(p) && std::isfinite(e) && std::isfinite(alpha), "forcing parameters must be finite");
    return ForcingSpec(Elliptic{p, e, alpha}, omega);
}

ForcingSpec ForcingSpec::elliptic(const PendulumParams& params)
{
    return elliptic(params.p, params.e, params.alpha, params.omega);
}

ForcingSpec ForcingSpec::sampled(std::vector<double> fx, std::vector<double> fy, double omega)
{
    require(omega > 0.0 && std::isfinite(omega), "omega must be positive");
    require(!fx.empty() && !fy.empty(), "empty forcing sample table");
    for (double x : fx) require(std::isfinite(x), "forcing samples must be finite");
    for (double y : fy) require(std::isfinite(y), "forcing samples must be finite");
    return ForcingSpec(Sampled{std::move(fx), std::move(fy)}, omega);
}

double ForcingSpec::interpolate(const std::vector<double>& table, double t) const
{
    const auto n = table.size();
    double u = std::fmod(t / period(), 1.0);
    if (u < 0.0) u += 1.0;
    const double pos = u * static_cast<double>(n);
    auto i = static_cast<std::size_t>(pos);
    if (i >= n) i = n - 1;
    const double frac = pos - static_cast<double>(i);
    const double lo = table[i];
    const double hi = table[(i + 1) % n];
    return lo + frac * (hi - lo);
}

double ForcingSpec::fx(double t) const
{
    if (const auto* el = std::get_if<Elliptic>(&form_))
        return el->e * el->p * std::cos(omega_ * t - el->alpha) / omega_;
    return interpolate(std::get<Sampled>(form_).fx, t);
}

double ForcingSpec::fy(double t) const
{
    if (const auto* el = std::get_if<Elliptic>(&form_)) return (el->p * std::cos(omega_ * t) + 1.0) / omega_;
    return interpolate(std::get<Sampled>(form_).fy, t);
}

Vec2 eval_rhs(const PendulumParams& params, const State& s)
{
    require_state(s);
    const double phase = params.omega * s.t;
    const double vertical = 1.0 + params.p * std::cos(phase);
    const double horizontal = params.e * params.p * std::cos(phase - params.alpha);
    return {s.v, -params.gamma * s.v - vertical * std::sin(s.theta) - horizontal * std::cos(s.theta)};
}

Vec2 eval_rhs_general(const ForcingSpec& forcing, double gamma, const State& s)
{
    require_state(s);
    const double w = forcing.omega();
    return {s.v, -gamma * s.v - w * forcing.fy(s.t) * std::sin(s.theta) - w * forcing.fx(s.t) * std::cos(s.theta)};
}

Mat2 eval_jacobian(const PendulumParams& params, const State& s)
{
    require_state(s);
    const double phase = params.omega * s.t;
    const double vertical = 1.0 + params.p * std::cos(phase);
    const double horizontal = params.e * params.p * std::cos(phase - params.alpha);
    return Mat2{{0.0, 1.0, -vertical * std::cos(s.theta) + horizontal * std::sin(s.theta), -params.gamma}};
}

PendulumParams nondimensionalize(const PhysicalParams& phys)
{
    require(phys.m > 0.0 && phys.l > 0.0 && phys.Omega > 0.0 && phys.g > 0.0, "m, l, Omega and g must be positive");
    require(phys.c >= 0.0 && phys.b >= 0.0, "c and b must be non-negative");
    if (!(phys.a > 0.0)) {
        if (phys.b > 0.0) throw Error(ErrorKind::invalid_argument, "horizontal-only excitation not representable; e undefined");
        throw Error(ErrorKind::invalid_argument, "vertical amplitude a must be positive");
    }
    const double omega0 = std::sqrt(phys.g / phys.l);
    PendulumParams out;
    out.gamma = phys.c / (omega0 * phys.m * phys.l * phys.l);
    out.omega = phys.Omega / omega0;
    out.p = phys.a * phys.Omega * phys.Omega / phys.g;
    out.e = phys.b / phys.a;
    out.alpha = pi / 2;
    return out;
}

}  // namespace epend
