#pragma once

// Pseudo-arclength continuation of periodic orbits in p or ω, with fold,
// period-doubling and branch-point detection through the Floquet test
// functions det(DP^k − I) and det(DP^k + I), plus per-ω scans stitched into
// two-parameter curves in the (ω, p)-plane.
//
// Curve labels (H, K1, K2, J, G, E, A, F, with p/n suffixes for rotation
// direction when e ≠ 0) are assigned from the orbit family and event order.
// They are presentation metadata, not verified identifications.

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "epend/integrate.hpp"
#include "epend/orbits.hpp"

namespace epend {

enum class ContinuationParameter { p, omega };
enum class BifurcationKind { fold, period_doubling, branch_point };

std::string_view to_string(ContinuationParameter p);
std::string_view to_string(BifurcationKind k);

double parameter_value(const PendulumParams& params, ContinuationParameter which);
PendulumParams with_parameter(const PendulumParams& params, ContinuationParameter which, double value);

struct ContinuationSettings {
    double step_initial = 0.01;
    double step_min = 1e-4;
    double step_max = 5e-2;
    double grow = 1.3;
    int easy_steps_to_grow = 4;
    int corrector_max_iterations = 8;
    double tol = 1e-10;
    int max_points = 4000;
    double fd_step = 1e-6;
};

struct BranchEntry {
    double lambda = 0.0;
    PeriodicOrbit orbit;
    Vec3 tangent{};  // (dθ, dv, dλ) per unit arclength
    double tau_fold = 0.0;
    double tau_pd = 0.0;
};

struct EventBracket {
    BifurcationKind kind;
    std::size_t index;  // event lies between entries[index] and entries[index + 1]
};

struct Branch {
    ContinuationParameter parameter = ContinuationParameter::p;
    PendulumParams base;  // parameters other than λ
    IntegratorSettings integrator;
    int k = 1;
    int w = 0;
    std::vector<BranchEntry> entries;
    std::vector<double> step_history;
    std::vector<EventBracket> brackets;
    bool truncated = false;
    std::string stop_reason;
};

struct BifurcationPoint {
    BifurcationKind kind = BifurcationKind::fold;
    double omega = 0.0;
    double p = 0.0;
    PeriodicOrbit orbit;
    std::string label;
    int direction = 0;  // winding number of the underlying orbit
};

/// Continues `seed` (an orbit of `params`) in the chosen parameter over
/// [lo, hi], starting in the direction of increasing (direction = +1) or
/// decreasing (−1) λ. Stops when λ leaves the range, after max_points, or when
/// the corrector fails at the minimum step (truncated = true).
Branch continue_branch(const PendulumParams& params, const PeriodicOrbit& seed, ContinuationParameter parameter,
                       double lo, double hi, int direction = 1, const ContinuationSettings& settings = {},
                       const IntegratorSettings& integrator = {});

/// Refines the event bracketed by entries[index] and entries[index + 1] by
/// secant/bisection along the chord until the critical multiplier is within
/// 1e-6 of ±1. Throws Error(invalid_bracket) when the test function does not
/// change sign across the bracket.
BifurcationPoint locate_event(const Branch& branch, std::size_t index, BifurcationKind kind,
                              const ContinuationSettings& settings = {});

/// All bracketed events of a branch, refined.
std::vector<BifurcationPoint> locate_events(const Branch& branch, const ContinuationSettings& settings = {});

/// The real multiplier closest to +1 (fold, branch point) or −1 (period doubling).
double critical_multiplier(const Multipliers& mu, BifurcationKind kind);

/// Orbit of period 2k bifurcating from a period-doubling point. Tries parameter
/// offsets on both sides of the event and returns the first Newton solution
/// that is not the period-k orbit itself.
std::optional<PeriodicOrbit> switch_at_period_doubling(const PendulumParams& params, const BifurcationPoint& event,
                                                       ContinuationParameter parameter,
                                                       const IntegratorSettings& integrator = {});

/// Nonsymmetric orbit bifurcating from a branch point (pitchfork).
std::optional<PeriodicOrbit> switch_at_branch_point(const PendulumParams& params, const BifurcationPoint& event,
                                                    ContinuationParameter parameter,
                                                    const IntegratorSettings& integrator = {});

/// Stability of the small libration along one ω: stable on [from, to).
struct StabilitySegment {
    double from, to;
    bool stable;
};

struct OmegaSlice {
    double omega = 0.0;
    std::vector<BifurcationPoint> points;
    std::vector<StabilitySegment> libration;  // up to its first fold or p_max
    double libration_end = 0.0;
    std::vector<std::string> gaps;
};

struct Polyline {
    std::string label;
    BifurcationKind kind;
    std::vector<BifurcationPoint> vertices;  // increasing ω
};

struct TongueDiagram {
    double e = 0.0;
    PendulumParams base;
    double p_max = 0.0;
    std::vector<OmegaSlice> slices;
    std::vector<Polyline> curves;
    bool partial = false;

    /// Libration stability at (slice index, p); false past its first fold.
    bool libration_stable(std::size_t slice, double p) const;
};

struct ScanOptions {
    bool rotations = true;
    bool follow_period_doubling = false;
    unsigned threads = 0;
    ContinuationSettings continuation;
    IntegratorSettings integrator;
};

/// Per-ω continuation in p of the libration (from p = 0) and of the w = ±1
/// rotations, with events refined and stitched into labelled polylines.
/// `base` supplies γ and α; e is overridden.
TongueDiagram tongue_scan(const PendulumParams& base, double e, const std::vector<double>& omega_grid, double p_max,
                          const ScanOptions& options = {});

/// Per-label polylines, each monotone in ω, joined by nearest neighbour in p.
std::vector<Polyline> stitch(const std::vector<OmegaSlice>& slices);

/// Seeds a period-one rotation with winding w at params: averaged-equation
/// guesses first, then short forward simulations.
std::optional<PeriodicOrbit> seed_rotation(const PendulumParams& params, int w, const IntegratorSettings& integrator = {});

}  // namespace epend
