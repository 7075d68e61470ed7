#pragma once

// Fixed-step RK4 locked to the forcing period, so every strobe time
// t0 + k·2π/ω is hit exactly. The monodromy matrix comes from integrating the
// variational equations alongside the state with the same scheme, which makes
// it the exact derivative of the discrete map.

#include <optional>
#include <vector>

#include "epend/linalg.hpp"
#include "epend/model.hpp"

namespace epend {

enum class RkScheme {
    classic4,  // the only scheme; kept as a tag so output files can record it
};

struct IntegratorSettings {
    int steps_per_period = 1024;
    RkScheme scheme = RkScheme::classic4;
};

inline constexpr int min_steps_per_period = 64;
inline constexpr double blow_up_velocity = 1e6;

void validate(const IntegratorSettings& settings);

struct StrobeResult {
    State state;
    std::optional<Mat2> monodromy;
};

/// Period map of the elliptic model for one parameter set. The forcing
/// coefficients at every RK stage of one period are tabulated on
/// construction, so advancing costs one sin/cos of θ per stage. States passed
/// in are assumed to sit at the section phase `section_time` (mod 2π/ω).
class StroboscopicMap {
public:
    StroboscopicMap(const PendulumParams& params, const IntegratorSettings& settings = {}, double section_time = 0.0);

    const PendulumParams& params() const { return params_; }
    int steps_per_period() const { return steps_; }
    double period() const { return period_; }

    /// State after k ≥ 0 periods.
    State advance(const State& s, int k = 1) const;

    /// State and DP^k after k ≥ 1 periods.
    StrobeResult advance_with_jacobian(const State& s, int k = 1) const;

private:
    PendulumParams params_;
    int steps_;
    double period_;
    double h_;
    // Coefficients at half-step nodes j·h/2, j = 0..2·steps_-1.
    std::vector<double> vertical_;
    std::vector<double> horizontal_;
};

/// Integrates from s0.t to t_final. Step size h = (2π/ω)/steps_per_period;
/// a final partial step lands exactly on t_final.
State flow(const PendulumParams& params, const State& s0, double t_final, const IntegratorSettings& settings = {});

/// Same integration as `flow`, keeping every `stride`-th step (and the end point).
std::vector<State> trajectory(const PendulumParams& params, const State& s0, double t_final,
                              const IntegratorSettings& settings = {}, int stride = 1);

/// Advances exactly k forcing periods, optionally with the monodromy matrix.
StrobeResult strobe(const PendulumParams& params, const State& s0, int k, const IntegratorSettings& settings = {},
                    bool want_jacobian = false);

/// Drops n_transient strobe points and returns the following n_record.
std::vector<State> record_strobes(const PendulumParams& params, const State& s0, int n_transient, int n_record,
                                  const IntegratorSettings& settings = {});

inline constexpr int default_transient_periods = 1000;

/// Doubles steps_per_period until two successive refinements of the k-period
/// strobe from s0 agree to `tol` (or `max_steps` is reached).
IntegratorSettings refine_until_converged(const PendulumParams& params, const State& s0, int k,
                                          IntegratorSettings settings, double tol = 1e-9, int max_steps = 1 << 16);

}  // namespace epend
