#pragma once

// High-frequency reduction for rotations. Writing φ = θ − ωt for a positive
// period-one rotation and averaging over one forcing period gives the slow
// equation
//
//   φ'' + (γ/√ω) φ' + γ + (p/2ω)[(1 − ε sinα) sinφ + ε cosα cosφ] = 0
//
// whose equilibria approximate rotations. The damping term γ/√ω·φ' only
// shapes transients, so the equilibrium routines below drop it.
//
// Negative rotations are the reflection θ ↦ −θ of positive rotations of the
// model with ε ↦ −ε. Their phase is reported as φ = θ + ωt, matching
// rotation_residual in orbits.hpp. For α = ±π/2 this is the same as
// replacing α by −α; the fold condition is identical either way.

#include <optional>

#include "epend/model.hpp"

namespace epend {

/// First-harmonic coefficients f^c = (ω/π)∫ f(s) cos(ωs) ds, f^s likewise.
struct FourierModes {
    double fyc = 0.0, fys = 0.0, fxc = 0.0, fxs = 0.0;
};

/// Elliptic forcing: composite trapezoid rule with `nodes` points (≥ 256).
/// Sampled tables: exact integrals of the piecewise-linear interpolant.
FourierModes fourier_modes(const ForcingSpec& forcing, int nodes = 1024);

struct NormalizedForcing {
    double p = 0.0;
    double eps = 0.0;
    double alpha = 0.0;       // (−π, π]; 0 by convention when eps == 0
    double time_shift = 0.0;  // τ in [0, 2π/ω) such that f(t + τ) has f_y^s = 0
};

/// Shifts time so that f_y^s = 0 and reads off ω f_y^c = p,
/// ω f_x^c = εp cosα, ω f_x^s = εp sinα. Throws Error(no_vertical_harmonic)
/// when the vertical first harmonic vanishes.
NormalizedForcing normalize_modes(const FourierModes& modes, double omega);

struct AveragedEquilibria {
    bool exists = false;
    double amplitude = 0.0;  // A = (p/2ω)·√(1 + ε² ∓ 2ε sinα)
    double phi0_stable = 0.0;
    double phi0_saddle = 0.0;
};

/// Equilibria of the averaged equation for direction = +1 or −1.
AveragedEquilibria averaged_equilibria(double p, double eps, double alpha, double gamma, double omega, int direction);

/// Residual of the steady averaged equation at phase phi, in the same
/// convention as averaged_equilibria.
double averaged_residual(double phi, double p, double eps, double alpha, double gamma, double omega, int direction);

/// Saddle-node amplitudes p_± = 2γω / √(1 + ε² ∓ 2ε sinα). An empty optional
/// marks a direction whose rotations never appear (ε = 1, sinα = ±1).
struct FoldPrediction {
    std::optional<double> positive;
    std::optional<double> negative;
};
FoldPrediction fold_prediction(double gamma, double eps, double alpha, double omega);

/// Fold prediction plus, when p is supplied, the equilibria in both directions.
struct AveragedPrediction {
    FoldPrediction fold;
    std::optional<AveragedEquilibria> positive;
    std::optional<AveragedEquilibria> negative;
};
AveragedPrediction averaged_prediction(double gamma, double eps, double alpha, double omega,
                                       std::optional<double> p = std::nullopt);

}  // namespace epend
