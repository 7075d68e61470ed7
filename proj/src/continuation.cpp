#include "epend/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "epend/averaging.hpp"
#include "epend/error.hpp"
#include "epend/parallel.hpp"

namespace epend {

std::string_view to_string(ContinuationParameter p) { return p == ContinuationParameter::p ? "p" : "omega"; }

std::string_view to_string(BifurcationKind k)
{
    switch (k) {
    case BifurcationKind::fold: return "fold";
    case BifurcationKind::period_doubling: return "period_doubling";
    case BifurcationKind::branch_point: return "branch_point";
    }
    return "fold";
}

double parameter_value(const PendulumParams& params, ContinuationParameter which)
{
    return which == ContinuationParameter::p ? params.p : params.omega;
}

PendulumParams with_parameter(const PendulumParams& params, ContinuationParameter which, double value)
{
    return which == ContinuationParameter::p ? params.with_p(value) : params.with_omega(value);
}

double critical_multiplier(const Multipliers& mu, BifurcationKind kind)
{
    const double target = kind == BifurcationKind::period_doubling ? -1.0 : 1.0;
    const auto& best = std::abs(mu[0] - target) <= std::abs(mu[1] - target) ? mu[0] : mu[1];
    return best.real();
}

namespace {

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// Extended system F(θ, v, λ) = P^k − x − (2πw, 0) evaluated on one branch.
class ExtendedSystem {
public:
    ExtendedSystem(const Branch& b, double fd_step) : b_(b), fd_step_(fd_step) {}

    struct Eval {
        Vec2 f;
        Mat2 a;  // DP^k − I
        Mat2 monodromy;
        Vec2 f_lambda;
    };

    PendulumParams params_at(double lambda) const { return with_parameter(b_.base, b_.parameter, lambda); }

    Vec2 residual(const Vec3& y) const
    {
        const StroboscopicMap map(params_at(y[2]), b_.integrator);
        const State s = map.advance({y[0], y[1], 0.0}, b_.k);
        return {s.theta - y[0] - two_pi * b_.w, s.v - y[1]};
    }

    Eval eval(const Vec3& y) const
    {
        const StroboscopicMap map(params_at(y[2]), b_.integrator);
        const ShootingResidual r = shooting_residual(map, State{y[0], y[1], 0.0}, b_.k, b_.w);
        Eval out{r.value, r.jacobian, r.monodromy, {}};
        const double delta = fd_step_ * std::max(1.0, std::abs(y[2]));
        const bool one_sided = b_.parameter == ContinuationParameter::p ? y[2] - delta < 0.0 : y[2] - delta <= 0.0;
        const Vec2 up = residual({y[0], y[1], y[2] + delta});
        if (one_sided) {
            out.f_lambda = {(up[0] - r.value[0]) / delta, (up[1] - r.value[1]) / delta};
        } else {
            const Vec2 down = residual({y[0], y[1], y[2] - delta});
            out.f_lambda = {(up[0] - down[0]) / (2.0 * delta), (up[1] - down[1]) / (2.0 * delta)};
        }
        return out;
    }

    static std::array<std::array<double, 3>, 3> bordered(const Eval& e, const Vec3& row)
    {
        return {{{e.a(0, 0), e.a(0, 1), e.f_lambda[0]}, {e.a(1, 0), e.a(1, 1), e.f_lambda[1]}, {row[0], row[1], row[2]}}};
    }

    static std::optional<Vec3> tangent(const Eval& e, const Vec3& previous)
    {
        auto t = solve3(bordered(e, previous), {0.0, 0.0, 1.0});
        if (!t) return std::nullopt;
        const double n = norm(*t);
        return Vec3{(*t)[0] / n, (*t)[1] / n, (*t)[2] / n};
    }

    // Newton on {F(y) = 0, normal·(y − anchor) = 0}.
    struct Corrected {
        Vec3 y;
        Eval eval;
        int iterations;
    };
    std::optional<Corrected> correct(Vec3 y, const Vec3& normal, const Vec3& anchor, int max_iterations,
                                     double tol) const
    {
        for (int it = 0; it <= max_iterations; ++it) {
            Eval e;
            try {
                e = eval(y);
            } catch (const Error&) {
                return std::nullopt;
            }
            const double plane = dot(normal, {y[0] - anchor[0], y[1] - anchor[1], y[2] - anchor[2]});
            if (norm(e.f) <= tol && std::abs(plane) <= 1e-10) return Corrected{y, e, it};
            if (it == max_iterations) break;
            const auto dy = solve3(bordered(e, normal), {-e.f[0], -e.f[1], -plane});
            if (!dy) return std::nullopt;
            for (int i = 0; i < 3; ++i) y[i] += (*dy)[i];
            if (!std::isfinite(y[2])) return std::nullopt;
        }
        return std::nullopt;
    }

    BranchEntry make_entry(const Vec3& y, const Eval& e, const Vec3& tangent) const
    {
        BranchEntry entry;
        entry.lambda = y[2];
        entry.orbit.x0 = {y[0], y[1], 0.0};
        entry.orbit.k = b_.k;
        entry.orbit.w = b_.w;
        entry.orbit.monodromy = e.monodromy;
        entry.orbit.multipliers = floquet_multipliers(e.monodromy);
        entry.orbit.stability = classify_stability(entry.orbit.multipliers);
        entry.orbit.residual = norm(e.f);
        entry.tangent = tangent;
        entry.tau_fold = e.a.det();
        entry.tau_pd = (e.monodromy + Mat2::identity()).det();
        return entry;
    }

private:
    const Branch& b_;
    double fd_step_;
};

Vec3 point_of(const BranchEntry& e) { return {e.orbit.x0.theta, e.orbit.x0.v, e.lambda}; }

void record_brackets(Branch& b)
{
    const std::size_t i = b.entries.size() - 2;
    const BranchEntry& a = b.entries[i];
    const BranchEntry& c = b.entries[i + 1];
    if (sign(a.tau_pd) * sign(c.tau_pd) < 0.0) b.brackets.push_back({BifurcationKind::period_doubling, i});
    if (sign(a.tau_fold) * sign(c.tau_fold) < 0.0) {
        const bool turning = sign(a.tangent[2]) * sign(c.tangent[2]) < 0.0;
        b.brackets.push_back({turning ? BifurcationKind::fold : BifurcationKind::branch_point, i});
    }
}

}  // namespace

Branch continue_branch(const PendulumParams& params, const PeriodicOrbit& seed, ContinuationParameter parameter,
                       double lo, double hi, int direction, const ContinuationSettings& settings,
                       const IntegratorSettings& integrator)
{
    if (!(lo < hi)) throw Error(ErrorKind::invalid_argument, "continuation range must satisfy lo < hi");
    if (direction != 1 && direction != -1) throw Error(ErrorKind::invalid_argument, "direction must be +1 or -1");
    if (seed.residual > 1e-8) throw Error(ErrorKind::invalid_argument, "seed orbit is not converged");

    Branch b;
    b.parameter = parameter;
    b.base = validated(params);
    b.integrator = integrator;
    b.k = seed.k;
    b.w = seed.w;
    const ExtendedSystem sys(b, settings.fd_step);

    Vec3 y{seed.x0.theta, seed.x0.v, parameter_value(b.base, parameter)};
    auto first = sys.correct(y, {0.0, 0.0, 1.0}, y, settings.corrector_max_iterations, settings.tol);
    if (!first) throw Error(ErrorKind::newton_diverged, "seed orbit does not converge on the branch");
    y = first->y;
    auto t = ExtendedSystem::tangent(first->eval, {0.0, 0.0, static_cast<double>(direction)});
    if (!t) throw Error(ErrorKind::near_bifurcation, "no tangent at the seed orbit");
    b.entries.push_back(sys.make_entry(y, first->eval, *t));

    double h = settings.step_initial;
    int easy = 0;
    bool at_boundary = false;
    while (static_cast<int>(b.entries.size()) < settings.max_points) {
        const BranchEntry& last = b.entries.back();
        const Vec3 y0 = point_of(last);
        const Vec3 t0 = last.tangent;
        Vec3 pred{y0[0] + h * t0[0], y0[1] + h * t0[1], y0[2] + h * t0[2]};

        std::optional<ExtendedSystem::Corrected> next;
        if (pred[2] < lo || pred[2] > hi) {
            if (at_boundary) {
                b.stop_reason = "left parameter range";
                break;
            }
            // Land exactly on the boundary with a natural-parameter step.
            const double bound = pred[2] < lo ? lo : hi;
            const double frac = (bound - y0[2]) / (pred[2] - y0[2]);
            const Vec3 anchor{y0[0] + frac * h * t0[0], y0[1] + frac * h * t0[1], bound};
            next = sys.correct(anchor, {0.0, 0.0, 1.0}, anchor, settings.corrector_max_iterations, settings.tol);
            if (!next) {
                b.stop_reason = "left parameter range";
                break;
            }
            at_boundary = true;
        } else {
            next = sys.correct(pred, t0, pred, settings.corrector_max_iterations, settings.tol);
            if (next) {
                const Vec3 d{next->y[0] - y0[0], next->y[1] - y0[1], next->y[2] - y0[2]};
                if (norm(d) > 2.0 * h || next->y[2] < lo - 1e-12 || next->y[2] > hi + 1e-12) next.reset();
            }
        }
        if (!next) {
            h *= 0.5;
            easy = 0;
            if (h < settings.step_min) {
                b.truncated = true;
                b.stop_reason = "corrector failed at minimum step";
                break;
            }
            continue;
        }

        auto tn = ExtendedSystem::tangent(next->eval, t0);
        if (!tn) {
            b.truncated = true;
            b.stop_reason = "singular extended Jacobian";
            break;
        }
        b.entries.push_back(sys.make_entry(next->y, next->eval, *tn));
        b.step_history.push_back(h);
        record_brackets(b);
        if (at_boundary) {
            b.stop_reason = "reached parameter bound";
            break;
        }
        if (next->iterations <= 3 && ++easy >= settings.easy_steps_to_grow) {
            h = std::min(h * settings.grow, settings.step_max);
            easy = 0;
        }
    }
    if (b.stop_reason.empty()) b.stop_reason = "max points";
    return b;
}

BifurcationPoint locate_event(const Branch& branch, std::size_t index, BifurcationKind kind,
                              const ContinuationSettings& settings)
{
    if (index + 1 >= branch.entries.size()) throw Error(ErrorKind::invalid_bracket, "bracket index out of range");
    const ExtendedSystem sys(branch, settings.fd_step);
    const BranchEntry& ea = branch.entries[index];
    const BranchEntry& eb = branch.entries[index + 1];
    auto test = [kind](const BranchEntry& e) { return kind == BifurcationKind::period_doubling ? e.tau_pd : e.tau_fold; };
    const double target = kind == BifurcationKind::period_doubling ? -1.0 : 1.0;

    double s_lo = 0.0, s_hi = 1.0;
    double f_lo = test(ea), f_hi = test(eb);
    if (!(sign(f_lo) * sign(f_hi) < 0.0)) throw Error(ErrorKind::invalid_bracket, "test function does not change sign");

    const Vec3 ya = point_of(ea), yb = point_of(eb);
    const Vec3 d{yb[0] - ya[0], yb[1] - ya[1], yb[2] - ya[2]};
    BranchEntry best = std::abs(critical_multiplier(ea.orbit.multipliers, kind) - target) <
                               std::abs(critical_multiplier(eb.orbit.multipliers, kind) - target)
                           ? ea
                           : eb;
    int stuck = 0;  // Illinois: same end retained twice in a row
    for (int iter = 0; iter < 80; ++iter) {
        if (std::abs(critical_multiplier(best.orbit.multipliers, kind) - target) <= 1e-9) break;
        if (s_hi - s_lo < 1e-15) break;
        double s = s_lo - f_lo * (s_hi - s_lo) / (f_hi - f_lo);
        if (!(s > s_lo && s < s_hi)) s = 0.5 * (s_lo + s_hi);
        const Vec3 anchor{ya[0] + s * d[0], ya[1] + s * d[1], ya[2] + s * d[2]};
        auto c = sys.correct(anchor, d, anchor, 12, settings.tol);
        if (!c) {
            // Fall back to bisection from the nearer bracket end.
            s = 0.5 * (s_lo + s_hi);
            const Vec3 mid{ya[0] + s * d[0], ya[1] + s * d[1], ya[2] + s * d[2]};
            c = sys.correct(mid, d, mid, 12, settings.tol);
            if (!c) break;
        }
        best = sys.make_entry(c->y, c->eval, ea.tangent);
        const double f = test(best);
        if (sign(f) == sign(f_lo)) {
            s_lo = s;
            f_lo = f;
            if (stuck == -1) f_hi *= 0.5;
            stuck = -1;
        } else {
            s_hi = s;
            f_hi = f;
            if (stuck == 1) f_lo *= 0.5;
            stuck = 1;
        }
    }

    BifurcationPoint out;
    out.kind = kind;
    const PendulumParams at = sys.params_at(best.lambda);
    out.omega = at.omega;
    out.p = at.p;
    out.orbit = best.orbit;
    out.direction = branch.w;
    return out;
}

std::vector<BifurcationPoint> locate_events(const Branch& branch, const ContinuationSettings& settings)
{
    std::vector<BifurcationPoint> out;
    for (const auto& br : branch.brackets) {
        try {
            out.push_back(locate_event(branch, br.index, br.kind, settings));
        } catch (const Error&) {
            // A bracket that cannot be refined is dropped rather than reported unrefined.
        }
    }
    return out;
}

namespace {

bool is_period_k_orbit(const PendulumParams& params, const State& x, int k, int w, const IntegratorSettings& integrator)
{
    const State y = strobe(params, x, k, integrator).state;
    return std::hypot(y.theta - x.theta - two_pi * w, y.v - x.v) < 1e-6;
}

std::optional<PeriodicOrbit> switch_branch(const PendulumParams& params, const BifurcationPoint& event,
                                           ContinuationParameter parameter, const IntegratorSettings& integrator,
                                           bool doubling)
{
    const int k = event.orbit.k;
    const int w = event.orbit.w;
    const int new_k = doubling ? 2 * k : k;
    if (new_k > max_period) return std::nullopt;
    const double target = doubling ? -1.0 : 1.0;
    const double mu = critical_multiplier(event.orbit.multipliers, doubling ? BifurcationKind::period_doubling
                                                                            : BifurcationKind::branch_point);
    if (std::abs(mu - target) > 1e-3) return std::nullopt;
    const Vec2 dir = eigenvector(event.orbit.monodromy, mu);
    const PendulumParams at = params.with_p(event.p).with_omega(event.omega);
    const double lambda0 = parameter_value(at, parameter);

    for (double offset : {1e-3, 3e-3, 1e-2, 3e-2}) {
        for (double side : {1.0, -1.0}) {
            const double lambda = lambda0 + side * offset;
            if (lambda < 0.0 || (parameter == ContinuationParameter::omega && lambda <= 0.0)) continue;
            const PendulumParams trial = with_parameter(at, parameter, lambda);
            for (double amp : {0.02, 0.05, 0.1, 0.2, 0.4}) {
                for (double s : {1.0, -1.0}) {
                    const State guess{event.orbit.x0.theta + s * amp * dir[0], event.orbit.x0.v + s * amp * dir[1],
                                      0.0};
                    try {
                        PeriodicOrbit o = find_orbit(trial, guess, new_k, doubling ? 2 * w : w, integrator);
                        const double dist = std::hypot(o.x0.theta - event.orbit.x0.theta, o.x0.v - event.orbit.x0.v);
                        if (doubling) {
                            if (!is_period_k_orbit(trial, o.x0, k, w, integrator)) return o;
                        } else if (dist > 1e-4) {
                            // The continued primary orbit also solves; require a genuinely new one.
                            try {
                                const PeriodicOrbit primary = find_orbit(trial, event.orbit.x0, k, w, integrator);
                                if (std::hypot(o.x0.theta - primary.x0.theta, o.x0.v - primary.x0.v) > 1e-4) return o;
                            } catch (const Error&) {
                                return o;
                            }
                        }
                    } catch (const Error&) {
                    }
                }
            }
        }
    }
    return std::nullopt;
}

}  // namespace

std::optional<PeriodicOrbit> switch_at_period_doubling(const PendulumParams& params, const BifurcationPoint& event,
                                                       ContinuationParameter parameter,
                                                       const IntegratorSettings& integrator)
{
    return switch_branch(params, event, parameter, integrator, true);
}

std::optional<PeriodicOrbit> switch_at_branch_point(const PendulumParams& params, const BifurcationPoint& event,
                                                    ContinuationParameter parameter,
                                                    const IntegratorSettings& integrator)
{
    return switch_branch(params, event, parameter, integrator, false);
}

std::optional<PeriodicOrbit> seed_rotation(const PendulumParams& params_in, int w, const IntegratorSettings& integrator)
{
    const PendulumParams params = validated(params_in);
    const double dir = w > 0 ? 1.0 : -1.0;
    auto attempt = [&](const State& guess) -> std::optional<PeriodicOrbit> {
        try {
            return find_orbit(params, guess, 1, w, integrator);
        } catch (const Error&) {
            return std::nullopt;
        }
    };

    std::optional<PeriodicOrbit> saddle;
    const double eps = std::abs(params.e);
    const double alpha = params.e >= 0.0 ? params.alpha : params.alpha + pi;
    const AveragedEquilibria eq = averaged_equilibria(params.p, eps, alpha, params.gamma, params.omega, w > 0 ? 1 : -1);
    if (eq.exists) {
        for (double phi : {eq.phi0_stable, eq.phi0_saddle}) {
            for (double scale : {1.0, 0.8, 1.2}) {
                if (auto o = attempt({phi, dir * scale * params.omega, 0.0})) {
                    if (o->stability == Stability::stable) return o;
                    if (!saddle) saddle = o;
                }
            }
        }
    }
    // Forward simulation: look for an attracting rotation with the right winding.
    const StroboscopicMap map(params, integrator);
    for (double v_scale : {1.0, 1.5, 0.7, 2.0}) {
        for (double theta0 : {0.0, pi / 2, pi, -pi / 2}) {
            try {
                State s = map.advance({theta0, dir * v_scale * params.omega, 0.0}, 150);
                const State next = map.advance(s, 1);
                if (std::abs(next.theta - s.theta - two_pi * w) < 0.3) {
                    if (auto o = attempt({wrap_to_pi(s.theta), s.v, 0.0})) return o;
                }
            } catch (const Error&) {
            }
        }
    }
    return saddle;
}

namespace {

std::string rotation_suffix(double e, int w)
{
    if (e == 0.0) return "";
    return w > 0 ? "p" : "n";
}

// The orbit stability just below and above the event in p.
std::pair<Stability, Stability> stability_around(const Branch& b, std::size_t index)
{
    const BranchEntry& a = b.entries[index];
    const BranchEntry& c = b.entries[index + 1];
    return a.lambda <= c.lambda ? std::pair{a.orbit.stability, c.orbit.stability}
                                : std::pair{c.orbit.stability, a.orbit.stability};
}

void collect_libration(const Branch& b, const ContinuationSettings& cs, OmegaSlice& slice)
{
    // Entries are in continuation order; the small libration ends at its first fold.
    std::size_t first_fold = b.entries.size();
    for (const auto& br : b.brackets)
        if (br.kind == BifurcationKind::fold) first_fold = std::min(first_fold, br.index);

    bool seen_plus_one = false;
    for (const auto& br : b.brackets) {
        BifurcationPoint pt;
        try {
            pt = locate_event(b, br.index, br.kind, cs);
        } catch (const Error&) {
            continue;
        }
        const bool before = br.index <= first_fold;
        if (br.kind == BifurcationKind::period_doubling) {
            pt.label = before ? "H" : "L";
        } else {
            pt.label = before && !seen_plus_one ? "K1" : "K2";
            if (before) seen_plus_one = true;
        }
        slice.points.push_back(pt);
    }

    // Stability profile along p up to the first fold.
    const std::size_t end = first_fold < b.entries.size() ? first_fold + 1 : b.entries.size();
    slice.libration_end = std::numeric_limits<double>::infinity();
    if (first_fold < b.entries.size()) {
        slice.libration_end = b.entries[first_fold].lambda;
        for (const auto& pt : slice.points)
            if (pt.kind == BifurcationKind::fold && pt.label == "K1") slice.libration_end = pt.p;
    }
    double from = b.entries.front().lambda;
    bool stable = b.entries.front().orbit.stability == Stability::stable;
    for (std::size_t i = 1; i < end; ++i) {
        const bool s = b.entries[i].orbit.stability == Stability::stable;
        if (s == stable) continue;
        // Boundary at the refined event inside this step when one exists.
        double boundary = 0.5 * (b.entries[i - 1].lambda + b.entries[i].lambda);
        for (const auto& pt : slice.points) {
            const double lo = std::min(b.entries[i - 1].lambda, b.entries[i].lambda);
            const double hi = std::max(b.entries[i - 1].lambda, b.entries[i].lambda);
            if (pt.p >= lo && pt.p <= hi && (pt.label == "H" || pt.label == "K1" || pt.label == "K2")) boundary = pt.p;
        }
        slice.libration.push_back({from, boundary, stable});
        from = boundary;
        stable = s;
    }
    const double last = end > 0 ? b.entries[end - 1].lambda : from;
    slice.libration.push_back({from, std::max(last, from), stable});
}

void collect_rotation(const std::vector<Branch>& parts, const ContinuationSettings& cs, double e, int w,
                      OmegaSlice& slice)
{
    const std::string suffix = rotation_suffix(e, w);
    std::vector<BifurcationPoint> pds;
    for (const Branch& b : parts) {
        for (const auto& br : b.brackets) {
            BifurcationPoint pt;
            try {
                pt = locate_event(b, br.index, br.kind, cs);
            } catch (const Error&) {
                continue;
            }
            if (br.kind == BifurcationKind::period_doubling) {
                const auto [below, above] = stability_around(b, br.index);
                if (below == Stability::stable) pt.label = "G" + suffix;
                else if (above == Stability::stable) pt.label = "E" + suffix;
                else pt.label = "PD" + suffix;
            } else {
                pt.label = "J" + suffix;
            }
            slice.points.push_back(pt);
        }
    }
}

bool same_event(const BifurcationPoint& a, const BifurcationPoint& b)
{
    return a.kind == b.kind && a.label == b.label && std::abs(a.p - b.p) < 1e-7 && std::abs(a.omega - b.omega) < 1e-12;
}

OmegaSlice scan_omega(const PendulumParams& base, double omega, double p_max, const ScanOptions& opt)
{
    OmegaSlice slice;
    slice.omega = omega;
    const PendulumParams at = base.with_omega(omega);
    const auto& cs = opt.continuation;

    // Small libration from the hanging equilibrium at p = 0.
    try {
        const PeriodicOrbit seed = find_orbit(at.with_p(0.0), {0.0, 0.0, 0.0}, 1, 0, opt.integrator);
        const Branch lib = continue_branch(at.with_p(0.0), seed, ContinuationParameter::p, 0.0, p_max, 1, cs,
                                           opt.integrator);
        collect_libration(lib, cs, slice);
        if (opt.follow_period_doubling) {
            for (const auto& pt : std::vector<BifurcationPoint>(slice.points)) {
                if (pt.label != "H") continue;
                const auto doubled = switch_at_period_doubling(at, pt, ContinuationParameter::p, opt.integrator);
                if (!doubled) continue;
                const PendulumParams start = at.with_p(pt.p);
                for (int dir : {1, -1}) {
                    // The doubled orbit was found slightly off the event; restart from there.
                    for (double off : {1e-3, -1e-3, 3e-3, -3e-3, 1e-2, -1e-2, 3e-2, -3e-2}) {
                        const PendulumParams trial = start.with_p(pt.p + off);
                        if (trial.p < 0.0 || !(trial.p <= p_max)) continue;
                        try {
                            const PeriodicOrbit o = find_orbit(trial, doubled->x0, doubled->k, doubled->w, opt.integrator);
                            const Branch b2 = continue_branch(trial, o, ContinuationParameter::p, 0.0, p_max, dir, cs,
                                                              opt.integrator);
                            for (const auto& br : b2.brackets) {
                                try {
                                    BifurcationPoint q = locate_event(b2, br.index, br.kind, cs);
                                    q.label = br.kind == BifurcationKind::period_doubling ? "F" : "A";
                                    slice.points.push_back(q);
                                } catch (const Error&) {
                                }
                            }
                            break;
                        } catch (const Error&) {
                        }
                    }
                }
                break;
            }
        }
    } catch (const Error& err) {
        slice.gaps.push_back(std::string("libration: ") + err.what());
    }

    if (opt.rotations) {
        const std::vector<int> windings = base.e == 0.0 ? std::vector<int>{1} : std::vector<int>{1, -1};
        for (int w : windings) {
            std::optional<PeriodicOrbit> seed;
            PendulumParams seed_params = at;
            for (double frac : {1.0, 0.75, 0.5, 0.35}) {
                seed_params = at.with_p(frac * p_max);
                seed = seed_rotation(seed_params, w, opt.integrator);
                if (seed) break;
            }
            if (!seed) {
                slice.gaps.push_back("rotation w=" + std::to_string(w) + ": no seed");
                continue;
            }
            std::vector<Branch> parts;
            for (int dir : {-1, 1}) {
                try {
                    parts.push_back(continue_branch(seed_params, *seed, ContinuationParameter::p, 0.0, p_max, dir, cs,
                                                    opt.integrator));
                } catch (const Error& err) {
                    slice.gaps.push_back("rotation w=" + std::to_string(w) + ": " + err.what());
                }
            }
            OmegaSlice rot;
            collect_rotation(parts, cs, base.e, w, rot);
            for (auto& pt : rot.points) {
                slice.points.push_back(pt);
                if (base.e == 0.0) {
                    // Mirror image: the w = −1 family has identical events.
                    BifurcationPoint m = pt;
                    m.direction = -pt.direction;
                    m.orbit.w = -pt.orbit.w;
                    m.orbit.x0 = reflect(pt.orbit.x0);
                    slice.points.push_back(m);
                }
            }
        }
    }

    // Both rotation parts start at the seed; drop duplicates.
    std::vector<BifurcationPoint> unique;
    for (const auto& pt : slice.points) {
        bool dup = false;
        for (const auto& u : unique) dup = dup || (same_event(u, pt) && u.direction == pt.direction);
        if (!dup) unique.push_back(pt);
    }
    slice.points = std::move(unique);
    std::stable_sort(slice.points.begin(), slice.points.end(), [](const auto& a, const auto& b) {
        return a.label != b.label ? a.label < b.label : a.p < b.p;
    });
    return slice;
}

}  // namespace

bool TongueDiagram::libration_stable(std::size_t slice, double p) const
{
    const OmegaSlice& s = slices.at(slice);
    if (p >= s.libration_end) return false;
    for (const auto& seg : s.libration)
        if (p >= seg.from && p <= seg.to) return seg.stable;
    return false;
}

std::vector<Polyline> stitch(const std::vector<OmegaSlice>& slices)
{
    constexpr double max_jump = 0.25;
    std::vector<std::size_t> order(slices.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return slices[a].omega < slices[b].omega; });

    std::vector<Polyline> done;
    std::map<std::pair<std::string, int>, std::vector<Polyline>> open;  // (label, direction)
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        const OmegaSlice& s = slices[order[pos]];
        std::map<std::pair<std::string, int>, std::vector<const BifurcationPoint*>> here;
        for (const auto& pt : s.points) here[{pt.label, pt.direction}].push_back(&pt);

        for (auto& [key, lines] : open) {
            std::vector<Polyline> still_open;
            auto& candidates = here[key];
            for (auto& line : lines) {
                const double p_last = line.vertices.back().p;
                const auto same_kind = std::count_if(candidates.begin(), candidates.end(),
                                                     [&](const auto* c) { return c->kind == line.kind; });
                // A lone continuation of a lone line is joined however steep the curve.
                const double jump = lines.size() == 1 && same_kind == 1 ? HUGE_VAL : max_jump;
                auto best = candidates.end();
                for (auto it = candidates.begin(); it != candidates.end(); ++it) {
                    if ((*it)->kind != line.kind || std::abs((*it)->p - p_last) > jump) continue;
                    if (best == candidates.end() || std::abs((*it)->p - p_last) < std::abs((*best)->p - p_last))
                        best = it;
                }
                if (best == candidates.end()) {
                    done.push_back(std::move(line));
                    continue;
                }
                line.vertices.push_back(**best);
                candidates.erase(best);
                still_open.push_back(std::move(line));
            }
            lines = std::move(still_open);
        }
        for (auto& [key, pts] : here)
            for (const auto* pt : pts) open[key].push_back(Polyline{pt->label, pt->kind, {*pt}});
    }
    for (auto& [key, lines] : open)
        for (auto& line : lines) done.push_back(std::move(line));
    std::stable_sort(done.begin(), done.end(), [](const Polyline& a, const Polyline& b) {
        if (a.label != b.label) return a.label < b.label;
        return a.vertices.front().omega < b.vertices.front().omega;
    });
    return done;
}

TongueDiagram tongue_scan(const PendulumParams& base_in, double e, const std::vector<double>& omega_grid, double p_max,
                          const ScanOptions& options)
{
    if (!std::is_sorted(omega_grid.begin(), omega_grid.end()))
        throw Error(ErrorKind::invalid_argument, "omega grid must be sorted");
    if (!(p_max > 0.0)) throw Error(ErrorKind::invalid_argument, "p_max must be positive");
    TongueDiagram out;
    out.e = e;
    out.base = validated(base_in.with_e(e));
    out.p_max = p_max;
    out.slices.resize(omega_grid.size());
    parallel_for(omega_grid.size(), options.threads,
                 [&](std::size_t i) { out.slices[i] = scan_omega(out.base, omega_grid[i], p_max, options); });
    for (const auto& s : out.slices) out.partial = out.partial || !s.gaps.empty();
    out.curves = stitch(out.slices);
    return out;
}

}  // namespace epend
