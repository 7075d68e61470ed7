// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion ids
// (A1 … A10) as arguments to run a subset.

#include <chrono>
#include <cstdio>
#include <functional>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "epend/averaging.hpp"
#include "epend/continuation.hpp"
#include "epend/explore.hpp"
#include "epend/orbits.hpp"
#include "oracles.hpp"

using namespace epend;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::optional<double> first_event(const Branch& branch, BifurcationKind kind)
{
    for (const auto& ev : locate_events(branch))
        if (ev.kind == kind) return ev.p;
    return std::nullopt;
}

// Fold of the period-one rotation with winding w, reached by continuing
// downward in p from a seed at p_seed.
std::optional<double> rotation_fold(PendulumParams params, int w, double p_seed)
{
    params.p = p_seed;
    const auto seed = seed_rotation(params, w);
    if (!seed) return std::nullopt;
    return first_event(continue_branch(params, *seed, ContinuationParameter::p, 0.0, p_seed, -1),
                       BifurcationKind::fold);
}

Outcome a1()
{
    const PendulumParams base{.gamma = 0.1, .omega = 2.0, .e = 0.0};
    const double predicted = *fold_prediction(0.1, 0.0, pi / 2, 2.0).positive;
    const auto j = rotation_fold(base, 1, 0.6);
    if (!j) return {false, "no fold found on the rotation branch"};
    const double rel = std::abs(*j - predicted) / predicted;
    return {rel <= 0.10, fmt("J at p=%.6f, averaging %.4f, relative deviation %.3f (limit 0.10)", *j, predicted, rel)};
}

Outcome a2()
{
    const PendulumParams base{.gamma = 0.1, .omega = 2.0, .e = 0.1};
    const auto jn = rotation_fold(base, -1, 0.6);
    const auto jp = rotation_fold(base, 1, 0.6);
    const auto j0 = rotation_fold(base.with_e(0.0), 1, 0.6);
    if (!jn || !jp || !j0) return {false, "missing fold"};
    const double pn = 2 * 0.1 * 2.0 / 1.1, pp = 2 * 0.1 * 2.0 / 0.9;
    const double rn = std::abs(*jn - pn) / pn, rp = std::abs(*jp - pp) / pp;
    const bool ordered = *jn < *j0 && *j0 < *jp;
    return {ordered && rn <= 0.15 && rp <= 0.15,
            fmt("J^n=%.6f (pred %.4f, dev %.3f) < J=%.6f < J^p=%.6f (pred %.4f, dev %.3f)", *jn, pn, rn, *j0, *jp, pp,
                rp)};
}

std::vector<double> grid(double lo, double hi, int n)
{
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) out[i] = lo + (hi - lo) * i / (n - 1);
    return out;
}

Outcome a3()
{
    ScanOptions options;
    options.rotations = false;
    const auto d = tongue_scan(PendulumParams{}, 0.0, grid(0.8, 1.2, 41), 2.0, options);
    double best = HUGE_VAL, at = 0;
    for (const auto& s : d.slices)
        for (const auto& pt : s.points)
            if (pt.label == "K1" && pt.p < best) best = pt.p, at = s.omega;
    if (!std::isfinite(best)) return {false, "no K1 point in the scan"};
    return {best >= 0.55 && best <= 0.85 && !d.partial, fmt("K1 minimum p=%.6f at omega=%.3f", best, at)};
}

// 4-connected components of cells where mask == value.
int components(const std::vector<std::vector<bool>>& mask, bool value)
{
    const int nx = static_cast<int>(mask.size()), ny = static_cast<int>(mask[0].size());
    std::vector<std::vector<bool>> seen(nx, std::vector<bool>(ny, false));
    int count = 0;
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j) {
            if (seen[i][j] || mask[i][j] != value) continue;
            ++count;
            std::vector<std::pair<int, int>> stack{{i, j}};
            seen[i][j] = true;
            while (!stack.empty()) {
                auto [x, y] = stack.back();
                stack.pop_back();
                const int nb[4][2] = {{x + 1, y}, {x - 1, y}, {x, y + 1}, {x, y - 1}};
                for (auto [a, b] : nb)
                    if (a >= 0 && a < nx && b >= 0 && b < ny && !seen[a][b] && mask[a][b] == value) {
                        seen[a][b] = true;
                        stack.push_back({a, b});
                    }
            }
        }
    return count;
}

std::vector<std::vector<bool>> stability_mask(const TongueDiagram& d, int np)
{
    std::vector<std::vector<bool>> mask(d.slices.size(), std::vector<bool>(np));
    for (std::size_t i = 0; i < d.slices.size(); ++i)
        for (int j = 0; j < np; ++j) mask[i][j] = d.libration_stable(i, d.p_max * (j + 0.5) / np);
    return mask;
}

Outcome a4()
{
    ScanOptions options;
    options.rotations = false;
    const auto omegas = grid(0.5, 3.0, 126);
    const auto d1 = tongue_scan(PendulumParams{}, 0.1, omegas, 2.0, options);
    const auto d0 = tongue_scan(PendulumParams{}, 0.0, omegas, 2.0, options);
    const auto m1 = stability_mask(d1, 400), m0 = stability_mask(d0, 400);
    const int s1 = components(m1, true), u1 = components(m1, false);
    const int s0 = components(m0, true), u0 = components(m0, false);
    return {s1 == 1 && u1 == 1 && !d1.partial,
            fmt("e=0.1: %d stable / %d unstable regions; e=0 reference: %d stable / %d unstable", s1, u1, s0, u0)};
}

Outcome a5()
{
    PendulumParams params{.gamma = 0.1, .p = 0.6, .omega = 1.8, .e = 0.1};
    std::string detail;
    std::optional<double> pd_neg;
    for (int w : {-1, 1}) {
        const auto seed = seed_rotation(params, w);
        if (!seed || seed->stability != Stability::stable) return {false, fmt("no stable w=%d rotation at p=0.6", w)};
        const auto pd = first_event(continue_branch(params, *seed, ContinuationParameter::p, 0.0, 2.0, 1),
                                    BifurcationKind::period_doubling);
        if (w < 0) pd_neg = pd;
        detail += fmt("w=%+d: PD at p=%.6f; ", w, pd ? *pd : NAN);
    }
    if (!pd_neg) return {false, "no period doubling on the negative rotation"};
    return {std::abs(*pd_neg - 1.35) <= 0.15, detail + "target 1.35 +- 0.15 for w=-1"};
}

Outcome a6()
{
    std::mt19937_64 rng(20260611);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int n = 0; n < 100; ++n) {
        const PendulumParams params{.gamma = 0.3 * u(rng), .p = 2.0 * u(rng), .omega = 0.5 + 2.5 * u(rng),
                                    .e = u(rng) - 0.5, .alpha = pi * (2 * u(rng) - 1)};
        const State s{pi * (2 * u(rng) - 1), 6 * u(rng) - 3, 0.0};
        const int k = 1 + n % 3;
        const State a = strobe(params, s, k).state;
        const State b = reflect(strobe(params.with_e(-params.e), reflect(s), k).state);
        const double t_end = 7.0 * u(rng);
        const State c = flow(params, s, t_end);
        const State d = reflect(flow(params.with_e(-params.e), reflect(s), t_end));
        worst = std::max({worst, std::abs(a.theta - b.theta), std::abs(a.v - b.v), std::abs(c.theta - d.theta),
                          std::abs(c.v - d.v)});
    }
    BasinSpec spec;
    spec.nx = spec.ny = 200;
    const BasinGrid g = basin(PendulumParams{.gamma = 0.1, .p = 0.5, .omega = 1.8, .e = 0.0}, spec);
    const std::size_t bad = mirror_mismatches(g, g);
    return {worst <= 1e-10 && bad == 0,
            fmt("max mirror deviation %.3g over 100 cases; e=0 basin 200x200: %zu cells without a mirrored match",
                worst, bad)};
}

Outcome a7()
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst_fd = 0.0, worst_det = 0.0;
    for (int n = 0; n < 50; ++n) {
        const PendulumParams params{.gamma = 0.3 * u(rng), .p = 2.0 * u(rng), .omega = 0.5 + 2.5 * u(rng),
                                    .e = u(rng) - 0.5, .alpha = pi * (2 * u(rng) - 1)};
        const State s{pi * (2 * u(rng) - 1), 4 * u(rng) - 2, 0.0};
        const int k = 1 + n % 2;
        const Mat2 m = *strobe(params, s, k, {}, true).monodromy;
        const double h = 1e-6;
        Mat2 fd;
        for (int col = 0; col < 2; ++col) {
            State plus = s, minus = s;
            (col == 0 ? plus.theta : plus.v) += h;
            (col == 0 ? minus.theta : minus.v) -= h;
            const State a = strobe(params, plus, k).state, b = strobe(params, minus, k).state;
            fd(0, col) = (a.theta - b.theta) / (2 * h);
            fd(1, col) = (a.v - b.v) / (2 * h);
        }
        worst_fd = std::max(worst_fd, norm(m - fd) / norm(m));
        const double expected = std::exp(-params.gamma * k * params.period());
        worst_det = std::max(worst_det, std::abs(m.det() - expected) / expected);
    }
    return {worst_fd <= 1e-5 && worst_det <= 1e-6,
            fmt("max relative FD error %.3g, max determinant error %.3g", worst_fd, worst_det)};
}

Outcome a8()
{
    std::string detail;
    double worst = 0.0;
    for (double omega : {1.9, 2.0, 2.1}) {
        const PendulumParams params{.gamma = 0.1, .p = 0.0, .omega = omega, .e = 0.0};
        const auto origin = find_orbit(params, State{}, 1, 0);
        const auto pd = first_event(continue_branch(params, origin, ContinuationParameter::p, 0.0, 1.0, 1),
                                    BifurcationKind::period_doubling);
        double lo = 0.0, hi = 0.01;
        while (hi < 1.0 && oracle::mathieu_pd_function(0.1, hi, omega) > 0) lo = hi, hi += 0.01;
        const double ref = oracle::mathieu_pd_threshold(0.1, omega, lo, hi);
        if (!pd) return {false, fmt("no period doubling at omega=%.1f", omega)};
        worst = std::max(worst, std::abs(*pd - ref));
        detail += fmt("omega=%.1f: %.8f vs %.8f; ", omega, *pd, ref);
    }
    return {worst <= 1e-6, detail + fmt("max difference %.2g", worst)};
}

Outcome a9()
{
    std::string detail;
    bool ok = true;
    for (int w : {-1, 1}) {
        double previous = HUGE_VAL;
        for (double scale : {1.0, 2.0, 4.0}) {
            const PendulumParams params{.gamma = 0.1, .p = 2.0 * scale, .omega = 5.0 * scale, .e = 0.1};
            const auto orbit = seed_rotation(params, w);
            if (!orbit || orbit->stability != Stability::stable) {
                ok = false;
                detail += fmt("w=%+d omega=%.0f: no stable rotation; ", w, params.omega);
                break;
            }
            const double r = rotation_residual(*orbit, params).max_abs_r;
            ok = ok && r < previous && (scale > 1.0 || r < 0.2);
            previous = r;
            detail += fmt("w=%+d omega=%.0f: %.4f; ", w, params.omega, r);
        }
    }
    return {ok, detail + "need < 0.2 at omega=5 and decreasing"};
}

Outcome a10()
{
    std::string detail;
    bool ok = true;
    for (double p : {0.5, 1.0}) {
        const BasinGrid g = basin(PendulumParams{.gamma = 0.1, .p = p, .omega = 1.8, .e = 0.1});
        const double cells = static_cast<double>(g.ids.size());
        const double neg = g.rotation_cells(-1) / cells, pos = g.rotation_cells(1) / cells;
        ok = ok && neg - pos >= 0.10;
        detail += fmt("p=%.1f: negative %.4f, positive %.4f of cells; ", p, neg, pos);
    }
    return {ok, detail + "need a margin of 0.10"};
}

}  // namespace

int main(int argc, char** argv)
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"A1", a1}, {"A2", a2}, {"A3", a3}, {"A4", a4}, {"A5", a5},
        {"A6", a6}, {"A7", a7}, {"A8", a8}, {"A9", a9}, {"A10", a10},
    };
    const std::set<std::string> only(argv + 1, argv + argc);
    int failures = 0;
    for (const auto& [id, run] : criteria) {
        if (!only.empty() && !only.count(id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = run();
        } catch (const std::exception& err) {
            out = {false, std::string("exception: ") + err.what()};
        }
        const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%-4s %s  %s [%.1f s]\n", id.c_str(), out.pass ? "PASS" : "FAIL", out.detail.c_str(), dt);
        std::fflush(stdout);
        failures += !out.pass;
    }
    return failures == 0 ? 0 : 1;
}
