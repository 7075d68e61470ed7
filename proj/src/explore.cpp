#include "epend/explore.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>
#include <variant>

#include "epend/error.hpp"
#include "epend/orbits.hpp"
#include "epend/parallel.hpp"

namespace epend {

std::string_view to_string(AttractorKind k)
{
    switch (k) {
    case AttractorKind::oscillation: return "oscillation";
    case AttractorKind::rotation: return "rotation";
    case AttractorKind::aperiodic: return "aperiodic";
    case AttractorKind::escaped: return "escaped";
    }
    return "?";
}

namespace {

double wrapped_distance(const State& a, const State& b)
{
    return std::max(std::abs(wrap_to_pi(a.theta - b.theta)), std::abs(a.v - b.v));
}

State wrapped(State s)
{
    s.theta = wrap_to_pi(s.theta);
    return s;
}

int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

}  // namespace

State AttractorClass::representative() const
{
    if (points.empty()) return {};
    return *std::min_element(points.begin(), points.end(), [](const State& a, const State& b) {
        return std::tie(a.theta, a.v) < std::tie(b.theta, b.v);
    });
}

std::string AttractorClass::label() const
{
    switch (kind) {
    case AttractorKind::oscillation: return "oscillation(" + std::to_string(k) + ")";
    case AttractorKind::rotation: return "rotation(" + std::to_string(k) + "," + std::to_string(w) + ")";
    case AttractorKind::aperiodic:
        return drift > 0 ? "aperiodic(+)" : drift < 0 ? "aperiodic(-)" : "aperiodic(0)";
    case AttractorKind::escaped: return "escaped";
    }
    return "?";
}

AttractorClass classify_record(const std::vector<State>& record, double omega, const Protocol& protocol)
{
    const int n = static_cast<int>(record.size());
    if (n < 2) throw Error(ErrorKind::invalid_argument, "classify_record needs at least two strobe points");
    const double period = two_pi / omega;
    const double tol_rot = protocol.tol_rot_factor * omega;

    AttractorClass out;
    out.mean_velocity = (record.back().theta - record.front().theta) / ((n - 1) * period);

    int k = 0;
    for (int cand = 1; cand <= std::min(max_period, n - 1) && k == 0; ++cand) {
        bool ok = true;
        for (int j = 0; j + cand < n && ok; ++j)
            ok = wrapped_distance(record[j + cand], record[j]) <= protocol.tol_match;
        if (ok) k = cand;
    }

    if (k > 0) {
        const double turns = (record[k].theta - record[0].theta) / two_pi;
        const int w = static_cast<int>(std::lround(turns));
        const double expected = static_cast<double>(w) / k * omega;
        if (std::abs(turns - w) < 1e-3 && std::abs(out.mean_velocity - expected) < tol_rot) {
            out.kind = w == 0 ? AttractorKind::oscillation : AttractorKind::rotation;
            out.k = k;
            out.w = w;
            for (int j = 0; j < k; ++j) out.points.push_back(wrapped(record[j]));
            return out;
        }
    }

    out.kind = AttractorKind::aperiodic;
    out.drift = std::abs(out.mean_velocity) < tol_rot ? 0 : sign_of(out.mean_velocity);
    for (const State& s : record) out.points.push_back(wrapped(s));
    return out;
}

namespace {

AttractorClass escaped_class()
{
    AttractorClass out;
    out.kind = AttractorKind::escaped;
    return out;
}

AttractorClass classify_with(const StroboscopicMap& map, State s, int transient, const Protocol& protocol)
{
    try {
        s = map.advance(s, transient);
        std::vector<State> record;
        record.reserve(protocol.n_record);
        for (int j = 0; j < protocol.n_record; ++j) {
            s = map.advance(s, 1);
            record.push_back(s);
        }
        return classify_record(record, map.params().omega, protocol);
    } catch (const Error& err) {
        if (err.kind() != ErrorKind::blow_up) throw;
        return escaped_class();
    }
}

void check_protocol(const Protocol& protocol)
{
    validate(protocol.integrator);
    if (protocol.n_transient < 0 || protocol.n_record < 2 || !(protocol.tol_match > 0.0) ||
        !(protocol.tol_rot_factor > 0.0))
        throw Error(ErrorKind::invalid_argument, "invalid classification protocol");
}

}  // namespace

AttractorClass classify_attractor(const PendulumParams& params, const State& ic, const Protocol& protocol)
{
    check_protocol(protocol);
    const StroboscopicMap map(validated(params), protocol.integrator);
    return classify_with(map, ic, protocol.n_transient, protocol);
}

bool same_attractor(const AttractorClass& a, const AttractorClass& b, double tol)
{
    if (a.kind != b.kind) return false;
    if (a.kind == AttractorKind::escaped) return true;
    if (a.kind == AttractorKind::aperiodic) return a.drift == b.drift;
    if (a.k != b.k || a.w != b.w) return false;
    const State rep = a.representative();
    return std::any_of(b.points.begin(), b.points.end(),
                       [&](const State& q) { return wrapped_distance(rep, q) <= tol; });
}

std::vector<SweepRow> sweep_amplitude(const PendulumParams& base, double omega, const std::vector<double>& p_list,
                                      std::vector<State> ic_list, const SweepOptions& options)
{
    check_protocol(options.protocol);
    if (!std::is_sorted(p_list.begin(), p_list.end()))
        throw Error(ErrorKind::invalid_argument, "p_list must be sorted");
    if (ic_list.empty()) ic_list = {State{0.01 * pi, 0.0, 0.0}, State{two_pi + 0.01 * pi, 0.0, 0.0}};

    const std::size_t n_ic = ic_list.size();
    std::vector<std::vector<SweepRow>> slots(p_list.size() * n_ic);
    parallel_for(slots.size(), options.threads, [&](std::size_t task) {
        const double p = p_list[task / n_ic];
        const std::size_t ic = task % n_ic;
        PendulumParams params = base;
        params.p = p;
        params.omega = omega;
        const AttractorClass c = classify_attractor(params, ic_list[ic], options.protocol);
        const double shift = c.kind == AttractorKind::rotation ? two_pi : 0.0;
        for (const State& s : c.points)
            slots[task].push_back({p, ic, s.theta + shift, c.kind, c.k, c.w});
        if (c.points.empty()) slots[task].push_back({p, ic, std::nan(""), c.kind, c.k, c.w});
    });

    std::vector<SweepRow> rows;
    for (auto& slot : slots) rows.insert(rows.end(), slot.begin(), slot.end());
    return rows;
}

double BasinGrid::theta_at(int i) const
{
    return spec.theta_min + (i + 0.5) * (spec.theta_max - spec.theta_min) / spec.nx;
}

double BasinGrid::v_at(int j) const { return spec.v_min + (j + 0.5) * (spec.v_max - spec.v_min) / spec.ny; }

std::size_t BasinGrid::rotation_cells(int sign) const
{
    std::size_t n = 0;
    for (const LegendEntry& e : legend)
        if (e.attractor.kind == AttractorKind::rotation && sign_of(e.attractor.w) == sign) n += e.cells;
    return n;
}

namespace {

struct Target {
    std::size_t candidate;
    int k;
    std::vector<State> cycle;
};

// Index of the first candidate equal to c, appending c when new.
std::size_t intern(std::vector<LegendEntry>& candidates, const AttractorClass& c, double tol)
{
    for (std::size_t i = 0; i < candidates.size(); ++i)
        if (same_attractor(c, candidates[i].attractor, tol) || same_attractor(candidates[i].attractor, c, tol))
            return i;
    candidates.push_back({c, 0, false});
    return candidates.size() - 1;
}

// Newton-polished cycle of a periodic attractor, or nullopt.
std::optional<PeriodicOrbit> verify(const PendulumParams& params, const AttractorClass& c,
                                    const IntegratorSettings& integrator)
{
    try {
        State guess = c.points.front();
        guess.t = 0.0;
        PeriodicOrbit orbit = find_orbit(params, guess, c.k, c.w, integrator);
        if (wrapped_distance(orbit.x0, guess) > 1e-3) return std::nullopt;
        return orbit;
    } catch (const Error&) {
        return std::nullopt;
    }
}

// Runs one cell until it settles near a target cycle; returns the target's
// candidate index, or classifies the full record.
std::variant<std::size_t, AttractorClass> run_cell(const StroboscopicMap& map, State s,
                                                   const std::vector<Target>& targets, const BasinSpec& spec)
{
    const Protocol& protocol = spec.protocol;
    try {
        for (int n = 0; n < protocol.n_transient; ++n) {
            s = map.advance(s, 1);
            for (const Target& target : targets) {
                for (const State& c : target.cycle) {
                    const double d = wrapped_distance(s, c);
                    if (d >= spec.capture_radius) continue;
                    if (wrapped_distance(map.advance(s, target.k), c) < d) return target.candidate;
                }
            }
        }
    } catch (const Error& err) {
        if (err.kind() != ErrorKind::blow_up) throw;
        return escaped_class();
    }
    return classify_with(map, s, 0, protocol);
}

}  // namespace

BasinGrid basin(const PendulumParams& params_in, const BasinSpec& spec)
{
    check_protocol(spec.protocol);
    if (spec.nx < 16 || spec.ny < 16) throw Error(ErrorKind::invalid_argument, "basin resolution must be at least 16x16");
    if (!(spec.theta_max > spec.theta_min) || !(spec.v_max > spec.v_min))
        throw Error(ErrorKind::invalid_argument, "basin window is empty");
    if (spec.discovery_n < 1 || !(spec.capture_radius > 0.0))
        throw Error(ErrorKind::invalid_argument, "invalid basin discovery settings");

    BasinGrid grid;
    grid.spec = spec;
    grid.params = validated(params_in);
    const StroboscopicMap map(grid.params, spec.protocol.integrator);
    const auto cell_state = [&](std::size_t cell) {
        return State{grid.theta_at(static_cast<int>(cell % spec.nx)), grid.v_at(static_cast<int>(cell / spec.nx)), 0.0};
    };

    // Discovery on a subgrid with the full protocol.
    const int dn = std::min({spec.discovery_n, spec.nx, spec.ny});
    std::vector<std::size_t> probe_cells;
    for (int b = 0; b < dn; ++b)
        for (int a = 0; a < dn; ++a) {
            const auto i = static_cast<std::size_t>((a + 0.5) * spec.nx / dn);
            const auto j = static_cast<std::size_t>((b + 0.5) * spec.ny / dn);
            probe_cells.push_back(j * spec.nx + i);
        }
    std::vector<AttractorClass> found(probe_cells.size());
    parallel_for(probe_cells.size(), spec.threads, [&](std::size_t n) {
        found[n] = classify_with(map, cell_state(probe_cells[n]), spec.protocol.n_transient, spec.protocol);
    });

    std::vector<LegendEntry> candidates;
    std::vector<Target> targets;
    for (const AttractorClass& c : found) {
        const std::size_t before = candidates.size();
        const std::size_t idx = intern(candidates, c, spec.protocol.tol_match);
        if (idx != before || !c.periodic()) continue;
        const auto orbit = verify(grid.params, c, spec.protocol.integrator);
        if (orbit && orbit->stability != Stability::stable) continue;
        Target target{idx, c.k, c.points};
        if (orbit) {
            candidates[idx].verified = true;
            target.cycle.clear();
            State s = orbit->x0;
            for (int j = 0; j < c.k; ++j) {
                target.cycle.push_back(wrapped(s));
                s = map.advance(s, 1);
            }
            candidates[idx].attractor.points = target.cycle;
        }
        targets.push_back(std::move(target));
    }

    // Every cell, with early capture by the fixed target set.
    const std::size_t cells = static_cast<std::size_t>(spec.nx) * spec.ny;
    std::vector<std::variant<std::size_t, AttractorClass>> results(cells);
    parallel_for(cells, spec.threads, [&](std::size_t cell) { results[cell] = run_cell(map, cell_state(cell), targets, spec); });

    std::vector<std::size_t> cell_candidate(cells);
    for (std::size_t cell = 0; cell < cells; ++cell) {
        if (const auto* idx = std::get_if<std::size_t>(&results[cell]))
            cell_candidate[cell] = *idx;
        else
            cell_candidate[cell] = intern(candidates, std::get<AttractorClass>(results[cell]), spec.protocol.tol_match);
        ++candidates[cell_candidate[cell]].cells;
    }

    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < candidates.size(); ++i)
        if (candidates[i].cells > 0) order.push_back(i);
    const auto key = [&](std::size_t i) {
        const AttractorClass& a = candidates[i].attractor;
        const State rep = a.representative();
        return std::make_tuple(static_cast<int>(a.kind), a.kind == AttractorKind::aperiodic ? a.drift : a.w, a.k,
                               rep.theta, rep.v);
    };
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return key(x) < key(y); });

    std::vector<std::int32_t> remap(candidates.size(), -1);
    for (std::size_t n = 0; n < order.size(); ++n) {
        remap[order[n]] = static_cast<std::int32_t>(n);
        grid.legend.push_back(candidates[order[n]]);
    }
    grid.ids.resize(cells);
    for (std::size_t cell = 0; cell < cells; ++cell) grid.ids[cell] = remap[cell_candidate[cell]];
    return grid;
}

std::size_t mirror_mismatches(const BasinGrid& a, const BasinGrid& b)
{
    if (a.spec.nx != b.spec.nx || a.spec.ny != b.spec.ny)
        throw Error(ErrorKind::invalid_argument, "basin grids differ in resolution");
    const double tol = std::max(a.spec.protocol.tol_match, b.spec.protocol.tol_match);

    std::vector<std::int32_t> mirror_id(a.legend.size(), -1);
    for (std::size_t n = 0; n < a.legend.size(); ++n) {
        AttractorClass r = a.legend[n].attractor;
        r.w = -r.w;
        r.drift = -r.drift;
        for (State& s : r.points) s = wrapped(reflect(s));
        for (std::size_t m = 0; m < b.legend.size(); ++m)
            if (same_attractor(r, b.legend[m].attractor, tol) || same_attractor(b.legend[m].attractor, r, tol)) {
                mirror_id[n] = static_cast<std::int32_t>(m);
                break;
            }
    }

    const int nx = a.spec.nx, ny = a.spec.ny;
    std::size_t bad = 0;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const std::int32_t want = mirror_id[a.id(i, j)];
            const int mi = nx - 1 - i, mj = ny - 1 - j;
            bool ok = false;
            for (int dj = -1; dj <= 1 && !ok; ++dj)
                for (int di = -1; di <= 1 && !ok; ++di) {
                    const int x = mi + di, y = mj + dj;
                    ok = x >= 0 && x < nx && y >= 0 && y < ny && b.id(x, y) == want;
                }
            if (!ok) ++bad;
        }
    return bad;
}

}  // namespace epend
