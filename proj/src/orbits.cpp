#include "epend/orbits.hpp"

#include <limits>
#include <string>

#include "epend/error.hpp"

namespace epend {

std::string_view to_string(Stability s)
{
    switch (s) {
    case Stability::stable: return "stable";
    case Stability::saddle: return "saddle";
    case Stability::unstable: return "unstable";
    }
    return "unstable";
}

Multipliers floquet_multipliers(const Mat2& monodromy) { return eigenvalues(monodromy); }

Stability classify_stability(const Multipliers& mu)
{
    constexpr double margin = 1e-8;
    const double a = std::abs(mu[0]);
    const double b = std::abs(mu[1]);
    const bool a_in = a < 1.0 - margin, b_in = b < 1.0 - margin;
    if (a_in && b_in) return Stability::stable;
    const bool a_out = a > 1.0, b_out = b > 1.0;
    if ((a_in && b_out) || (b_in && a_out)) return Stability::saddle;
    return Stability::unstable;
}

ShootingResidual shooting_residual(const StroboscopicMap& map, const State& x, int k, int w)
{
    const StrobeResult r = map.advance_with_jacobian(x, k);
    const Mat2 m = *r.monodromy;
    return {Vec2{r.state.theta - x.theta - two_pi * w, r.state.v - x.v}, m - Mat2::identity(), m};
}

namespace {

PeriodicOrbit newton(const StroboscopicMap& map, State x, int k, int w, const NewtonOptions& opt)
{
    PeriodicOrbit orbit;
    orbit.k = k;
    orbit.w = w;
    ShootingResidual f = shooting_residual(map, x, k, w);
    double res = norm(f.value);
    orbit.residual_history.push_back(res);
    int it = 0;
    while (res > opt.tol) {
        if (it == opt.max_iterations)
            throw Error(ErrorKind::newton_diverged, "newton-diverged (residual " + std::to_string(res) + ")", res);
        const auto inv = inverse(f.jacobian);
        if (!inv || norm(*inv) > opt.max_inverse_norm)
            throw Error(ErrorKind::near_bifurcation, "near-bifurcation: DP^k - I is singular", res);
        const Vec2 step = *inv * f.value;

        double lambda = 1.0;
        State trial{};
        ShootingResidual ft{};
        double trial_res = 0.0;
        bool accepted = false;
        for (int halving = 0; halving <= opt.max_halvings; ++halving) {
            trial = State{x.theta - lambda * step[0], x.v - lambda * step[1], x.t};
            try {
                ft = shooting_residual(map, trial, k, w);
                trial_res = norm(ft.value);
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::blow_up) throw;
                trial_res = std::numeric_limits<double>::infinity();
            }
            if (trial_res < res) {
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        // Line search exhausted: keep the smallest trial step.
        if (!accepted && !std::isfinite(trial_res))
            throw Error(ErrorKind::newton_diverged, "newton-diverged (residual " + std::to_string(res) + ")", res);
        x = trial;
        f = ft;
        res = trial_res;
        orbit.residual_history.push_back(res);
        ++it;
    }
    orbit.x0 = x;
    orbit.residual = res;
    orbit.iterations = it;
    orbit.monodromy = f.jacobian + Mat2::identity();
    orbit.multipliers = floquet_multipliers(orbit.monodromy);
    orbit.stability = classify_stability(orbit.multipliers);
    return orbit;
}

}  // namespace

PeriodicOrbit find_orbit(const PendulumParams& params, const State& guess, int k, int w,
                         const IntegratorSettings& settings, const NewtonOptions& options)
{
    if (k < 1 || k > max_period) throw Error(ErrorKind::invalid_argument, "period k must be in [1, 32]");
    if (!guess.finite()) throw Error(ErrorKind::invalid_state, "invalid state");
    PeriodicOrbit orbit = newton(StroboscopicMap(params, settings, guess.t), guess, k, w, options);
    if (!options.convergence_guard) return orbit;

    IntegratorSettings current = settings;
    for (;;) {
        const IntegratorSettings refined = refine_until_converged(params, orbit.x0, k, current, 1e-9);
        if (refined.steps_per_period == current.steps_per_period) return orbit;
        current = refined;
        orbit = newton(StroboscopicMap(params, current, guess.t), orbit.x0, k, w, options);
    }
}

RotationResidual rotation_residual(const PeriodicOrbit& orbit, const PendulumParams& params,
                                   const IntegratorSettings& settings)
{
    if (orbit.k != 1 || std::abs(orbit.w) != 1)
        throw Error(ErrorKind::invalid_argument, "rotation_residual needs a period-one rotation");
    const double sign = orbit.w > 0 ? 1.0 : -1.0;
    const auto path = trajectory(params, orbit.x0, orbit.x0.t + params.period(), settings, 1);
    // The last sample duplicates the first one period later; drop it.
    std::vector<double> d;
    d.reserve(path.size());
    double sum_sin = 0.0, sum_cos = 0.0;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        const double di = path[i].theta - sign * params.omega * path[i].t;
        d.push_back(di);
        sum_sin += std::sin(di);
        sum_cos += std::cos(di);
    }
    const double phi0 = std::atan2(sum_sin, sum_cos);
    double worst = 0.0;
    for (double di : d) worst = std::max(worst, std::abs(wrap_to_pi(di - phi0)));
    return {phi0, worst};
}

}  // namespace epend
