#pragma once

// Periodic oscillations and rotations as fixed points of the lifted k-period
// stroboscopic map:  P^k(x) − x − (2πw, 0) = 0.

#include <array>
#include <complex>
#include <string_view>
#include <vector>

#include "epend/integrate.hpp"
#include "epend/linalg.hpp"
#include "epend/model.hpp"

namespace epend {

inline constexpr int max_period = 32;

enum class Stability { stable, saddle, unstable };

std::string_view to_string(Stability s);

using Multipliers = std::array<std::complex<double>, 2>;

struct PeriodicOrbit {
    State x0;          // on the section, t = section time
    int k = 1;         // period in forcing periods
    int w = 0;         // θ advances 2πw over k periods
    Multipliers multipliers{};
    Stability stability = Stability::unstable;
    double residual = 0.0;
    Mat2 monodromy;
    int iterations = 0;
    std::vector<double> residual_history;

    bool is_rotation() const { return w != 0; }
};

struct NewtonOptions {
    double tol = 1e-10;
    int max_iterations = 25;
    int max_halvings = 8;
    double max_inverse_norm = 1e12;
    // Re-check the converged orbit against a doubled step count and re-polish
    // if the strobe moves by more than 1e-9.
    bool convergence_guard = false;
};

/// Newton shooting with damped line search. Throws Error(newton_diverged)
/// carrying the last residual, or Error(near_bifurcation) when DP^k − I is
/// numerically singular.
PeriodicOrbit find_orbit(const PendulumParams& params, const State& guess, int k, int w,
                         const IntegratorSettings& settings = {}, const NewtonOptions& options = {});

/// Stable iff both |μ| < 1 − 1e-8; saddle iff one inside and one outside the
/// unit circle; unstable otherwise.
Stability classify_stability(const Multipliers& mu);

Multipliers floquet_multipliers(const Mat2& monodromy);

/// F(x) = P^k(x) − x − (2πw, 0) and its Jacobian at x.
struct ShootingResidual {
    Vec2 value;
    Mat2 jacobian;  // DP^k − I
    Mat2 monodromy;
};
ShootingResidual shooting_residual(const StroboscopicMap& map, const State& x, int k, int w);

struct RotationResidual {
    double phi0;       // circular mean of θ(t) − sign(w)ωt, in (−π, π]
    double max_abs_r;  // ‖r‖∞ over one period
};

/// Samples θ(t) − sign(w)ωt over one period of a period-one rotation.
RotationResidual rotation_residual(const PeriodicOrbit& orbit, const PendulumParams& params,
                                   const IntegratorSettings& settings = {});

}  // namespace epend
