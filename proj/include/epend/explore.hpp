#pragma once

// Brute-force dynamics: long simulations classified by the recurrence of
// their strobe points, amplitude sweeps, and basin-of-attraction grids.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "epend/integrate.hpp"
#include "epend/model.hpp"

namespace epend {

enum class AttractorKind { oscillation, rotation, aperiodic, escaped };

std::string_view to_string(AttractorKind k);

struct Protocol {
    int n_transient = default_transient_periods;
    int n_record = 64;
    double tol_match = 1e-5;
    double tol_rot_factor = 0.05;  // tol_rot = factor · ω
    IntegratorSettings integrator;
};

struct AttractorClass {
    AttractorKind kind = AttractorKind::aperiodic;
    int k = 0;  // 0 unless periodic
    int w = 0;
    std::vector<State> points;  // wrapped θ; one full cycle, or the whole record when aperiodic
    double mean_velocity = 0.0;
    int drift = 0;  // sign of mean_velocity for aperiodic attractors, else 0

    bool periodic() const { return kind == AttractorKind::oscillation || kind == AttractorKind::rotation; }
    /// The cycle point with the smallest wrapped θ (ties by v).
    State representative() const;
    std::string label() const;
};

/// Classification of the strobe sequence `record` taken at consecutive
/// periods; `record` must hold at least 2 points.
AttractorClass classify_record(const std::vector<State>& record, double omega, const Protocol& protocol = {});

/// Runs the transient, records strobe points and classifies them.
AttractorClass classify_attractor(const PendulumParams& params, const State& ic, const Protocol& protocol = {});

/// Same periodic attractor: equal kind, k and w, and the representative of
/// one lies within tol of a cycle point of the other. Aperiodic attractors
/// match when their drift signs agree.
bool same_attractor(const AttractorClass& a, const AttractorClass& b, double tol);

struct SweepRow {
    double p = 0.0;
    std::size_t ic = 0;
    double theta_strobe = 0.0;
    AttractorKind kind = AttractorKind::aperiodic;
    int k = 0;
    int w = 0;
};

struct SweepOptions {
    Protocol protocol;
    unsigned threads = 0;
};

/// Fig.-3 style sweep: for every p and initial condition, the recorded strobe
/// θ (wrapped to [−π, π), rotations shifted into [π, 3π)). p_list must be
/// sorted. An empty ic_list means (0.01π, 0) and (2π + 0.01π, 0).
std::vector<SweepRow> sweep_amplitude(const PendulumParams& base, double omega, const std::vector<double>& p_list,
                                      std::vector<State> ic_list = {}, const SweepOptions& options = {});

struct BasinSpec {
    double theta_min = -pi, theta_max = pi;
    double v_min = -4.0, v_max = 4.0;
    int nx = 400, ny = 400;
    Protocol protocol{.integrator = {.steps_per_period = 128}};
    // Attractors found by full simulation of a discovery_n × discovery_n
    // subgrid are refined by Newton; later cells stop as soon as they settle
    // within capture_radius of one of their cycles.
    int discovery_n = 20;
    double capture_radius = 1e-3;
    unsigned threads = 0;
};

struct LegendEntry {
    AttractorClass attractor;
    std::size_t cells = 0;
    bool verified = false;  // periodic and re-found by find_orbit
};

struct BasinGrid {
    BasinSpec spec;
    PendulumParams params;
    std::vector<std::int32_t> ids;  // row-major, row j at v_min + (j + ½)·dv
    std::vector<LegendEntry> legend;

    double theta_at(int i) const;
    double v_at(int j) const;
    std::int32_t id(int i, int j) const { return ids[static_cast<std::size_t>(j) * spec.nx + i]; }
    /// Cells attracted to rotations with winding sign `sign`.
    std::size_t rotation_cells(int sign) const;
};

BasinGrid basin(const PendulumParams& params, const BasinSpec& spec = {});

/// Cells of `a` whose reflected cell in `b` (θ, v ↦ −θ, −v) carries the
/// reflected attractor, allowing a match anywhere in the 3×3 neighbourhood.
/// Returns the number of cells without such a match. Grids must share the
/// resolution and have windows symmetric about the origin.
std::size_t mirror_mismatches(const BasinGrid& a, const BasinGrid& b);

}  // namespace epend
