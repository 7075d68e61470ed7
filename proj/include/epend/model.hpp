#pragma once

// Elliptically driven pendulum in dimensionless form:
//
//   θ'' + γθ' + (1 + p cos ωt) sinθ + e p cos(ωt − α) cosθ = 0
//
// with α = π/2 giving the upright-ellipse model e p sin(ωt) cosθ. The
// ellipticity is written both e and ε in the literature; here it is always
// the field `e`.
//
// Sign convention: with α = π/2 the horizontal drive favours rotations with
// negative θ' (see fold_prediction in averaging.hpp). Which physical sense of
// base travel that corresponds to depends on how the pivot geometry is drawn,
// so treat "negative" as a statement about this equation only.

#include <cmath>
#include <numbers>
#include <variant>
#include <vector>

#include "epend/linalg.hpp"

namespace epend {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Maps an angle into [−π, π).
inline double wrap_to_pi(double x)
{
    double r = std::fmod(x + pi, two_pi);
    if (r < 0.0) r += two_pi;
    return r - pi;
}

struct PendulumParams {
    double gamma = 0.1;
    double p = 0.0;
    double omega = 2.0;
    double e = 0.0;
    double alpha = pi / 2;

    double period() const { return two_pi / omega; }

    PendulumParams with_p(double v) const { auto c = *this; c.p = v; return c; }
    PendulumParams with_omega(double v) const { auto c = *this; c.omega = v; return c; }
    PendulumParams with_e(double v) const { auto c = *this; c.e = v; return c; }
};

/// Throws Error(invalid_argument) unless omega > 0, gamma >= 0, p >= 0 and
/// everything is finite. Returns a copy with alpha reduced to [−π, π].
PendulumParams validated(const PendulumParams& params);

/// Point on the universal cover of the cylinder. θ is never reduced
/// implicitly; use wrap_to_pi when a reduced angle is wanted.
struct State {
    double theta = 0.0;
    double v = 0.0;
    double t = 0.0;

    bool finite() const { return std::isfinite(theta) && std::isfinite(v) && std::isfinite(t); }
    Vec2 xy() const { return {theta, v}; }
};

struct PhysicalParams {
    double m = 1.0;      // kg
    double l = 1.0;      // m
    double c = 0.0;      // N·m·s
    double a = 0.0;      // vertical amplitude, m
    double b = 0.0;      // horizontal amplitude, m
    double Omega = 1.0;  // rad/s
    double g = 9.81;     // m/s²
};

/// Periodic forcing of the general model θ'' + γθ' + ω f_y(t) sinθ + ω f_x(t) cosθ = 0.
/// Either the built-in elliptic form, or tables sampled uniformly over one
/// period [0, 2π/ω) and interpolated linearly with periodic wraparound.
class ForcingSpec {
public:
    struct Elliptic {
        double p, e, alpha;
    };
    struct Sampled {
        std::vector<double> fx, fy;
    };

    /// ω f_x = e p cos(ωt − α), ω f_y = p cos(ωt) + 1.
    static ForcingSpec elliptic(double p, double e, double alpha, double omega);
    static ForcingSpec elliptic(const PendulumParams& params);
    static ForcingSpec sampled(std::vector<double> fx, std::vector<double> fy, double omega);

    double omega() const { return omega_; }
    double period() const { return two_pi / omega_; }
    double fx(double t) const;
    double fy(double t) const;

    const std::variant<Elliptic, Sampled>& form() const { return form_; }

private:
    ForcingSpec(std::variant<Elliptic, Sampled> form, double omega) : form_(std::move(form)), omega_(omega) {}
    double interpolate(const std::vector<double>& table, double t) const;

    std::variant<Elliptic, Sampled> form_;
    double omega_;
};

/// (dθ/dt, dv/dt) of the elliptic model.
Vec2 eval_rhs(const PendulumParams& params, const State& s);

/// (dθ/dt, dv/dt) of the general periodically forced model.
Vec2 eval_rhs_general(const ForcingSpec& forcing, double gamma, const State& s);

/// ∂(dθ/dt, dv/dt)/∂(θ, v).
Mat2 eval_jacobian(const PendulumParams& params, const State& s);

/// Physical pendulum on an elliptic slider to dimensionless parameters:
/// ω0 = √(g/l), γ = c/(ω0 m l²), ω = Ω/ω0, p = aΩ²/g, e = b/a, α = π/2.
PendulumParams nondimensionalize(const PhysicalParams& phys);

/// (θ, v, t) ↦ (−θ, −v, t). Maps solutions for e onto solutions for −e.
constexpr State reflect(const State& s) { return {-s.theta, -s.v, s.t}; }

}  // namespace epend
