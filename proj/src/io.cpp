#include "epend/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <set>

#include "epend/error.hpp"

namespace epend::io {

std::string fmt(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

double round12(double x) { return std::isfinite(x) ? std::stod(fmt(x)) : x; }

namespace {

// json has no representation for inf/nan; they become null.
json number(double x) { return std::isfinite(x) ? json(round12(x)) : json(nullptr); }

double read_number(const json& doc, const char* key, double fallback)
{
    if (!doc.contains(key)) return fallback;
    const json& v = doc.at(key);
    if (!v.is_number()) throw Error(ErrorKind::invalid_argument, std::string("parameter '") + key + "' must be a number");
    return v.get<double>();
}

void reject_unknown(const json& doc, const std::set<std::string>& allowed, const char* where)
{
    if (!doc.is_object()) throw Error(ErrorKind::invalid_argument, std::string(where) + " must be a JSON object");
    for (const auto& item : doc.items())
        if (!allowed.count(item.key()))
            throw Error(ErrorKind::invalid_argument, std::string("unknown key '") + item.key() + "' in " + where);
}

json multipliers_json(const Multipliers& mu)
{
    json out = json::array();
    for (const auto& m : mu) out.push_back({{"re", number(m.real())}, {"im", number(m.imag())}});
    return out;
}

}  // namespace

json to_json(const PendulumParams& params)
{
    return {{"gamma", number(params.gamma)},
            {"p", number(params.p)},
            {"omega", number(params.omega)},
            {"e", number(params.e)},
            {"alpha", number(params.alpha)}};
}

PhysicalParams physical_from_json(const json& doc)
{
    reject_unknown(doc, {"m", "l", "c", "a", "b", "Omega", "g"}, "physical");
    PhysicalParams phys;
    phys.m = read_number(doc, "m", phys.m);
    phys.l = read_number(doc, "l", phys.l);
    phys.c = read_number(doc, "c", phys.c);
    phys.a = read_number(doc, "a", phys.a);
    phys.b = read_number(doc, "b", phys.b);
    phys.Omega = read_number(doc, "Omega", phys.Omega);
    phys.g = read_number(doc, "g", phys.g);
    return phys;
}

PendulumParams params_from_json(const json& doc, const PendulumParams& defaults)
{
    reject_unknown(doc, {"gamma", "p", "omega", "e", "alpha", "physical"}, "parameters");
    if (doc.contains("physical")) {
        if (doc.size() > 1)
            throw Error(ErrorKind::invalid_argument, "give either dimensionless parameters or a physical block, not both");
        return validated(nondimensionalize(physical_from_json(doc.at("physical"))));
    }
    PendulumParams out = defaults;
    out.gamma = read_number(doc, "gamma", out.gamma);
    out.p = read_number(doc, "p", out.p);
    out.omega = read_number(doc, "omega", out.omega);
    out.e = read_number(doc, "e", out.e);
    out.alpha = read_number(doc, "alpha", out.alpha);
    return validated(out);
}

json to_json(const PeriodicOrbit& orbit)
{
    return {{"theta0", number(orbit.x0.theta)},
            {"v0", number(orbit.x0.v)},
            {"k", orbit.k},
            {"w", orbit.w},
            {"mu", multipliers_json(orbit.multipliers)},
            {"stability", std::string(to_string(orbit.stability))},
            {"residual", number(orbit.residual)}};
}

json to_json(const BifurcationPoint& point)
{
    return {{"label", point.label},
            {"kind", std::string(to_string(point.kind))},
            {"omega", number(point.omega)},
            {"p", number(point.p)},
            {"orbit", to_json(point.orbit)}};
}

json to_json(const AveragedPrediction& prediction)
{
    const auto opt = [](const std::optional<double>& x) { return x ? number(*x) : json(nullptr); };
    json out = {{"p_fold_positive", opt(prediction.fold.positive)},
                {"p_fold_negative", opt(prediction.fold.negative)}};
    json phi = json::array();
    const auto add = [&](const std::optional<AveragedEquilibria>& eq, int w) {
        if (!eq || !eq->exists) return;
        phi.push_back({{"w", w}, {"stable", number(eq->phi0_stable)}, {"saddle", number(eq->phi0_saddle)}});
    };
    add(prediction.positive, 1);
    add(prediction.negative, -1);
    out["phi0"] = phi;
    return out;
}

json to_json(const TongueDiagram& diagram)
{
    json out;
    out["e"] = number(diagram.e);
    out["params"] = to_json(diagram.base);
    out["p_max"] = number(diagram.p_max);
    out["partial"] = diagram.partial;
    json slices = json::array();
    for (const OmegaSlice& s : diagram.slices) {
        json points = json::array();
        for (const auto& pt : s.points) points.push_back(to_json(pt));
        json segments = json::array();
        for (const auto& seg : s.libration)
            segments.push_back({{"from", number(seg.from)}, {"to", number(seg.to)}, {"stable", seg.stable}});
        slices.push_back({{"omega", number(s.omega)},
                          {"points", points},
                          {"libration", segments},
                          {"libration_end", number(s.libration_end)},
                          {"gaps", s.gaps}});
    }
    out["slices"] = slices;
    json curves = json::array();
    for (const Polyline& c : diagram.curves) {
        json vertices = json::array();
        for (const auto& v : c.vertices) vertices.push_back({number(v.omega), number(v.p)});
        curves.push_back({{"label", c.label}, {"kind", std::string(to_string(c.kind))}, {"vertices", vertices}});
    }
    out["curves"] = curves;
    return out;
}

json legend_json(const BasinGrid& grid)
{
    json entries = json::array();
    for (std::size_t id = 0; id < grid.legend.size(); ++id) {
        const LegendEntry& e = grid.legend[id];
        const State rep = e.attractor.representative();
        entries.push_back({{"id", id},
                           {"label", e.attractor.label()},
                           {"kind", std::string(to_string(e.attractor.kind))},
                           {"k", e.attractor.k},
                           {"w", e.attractor.w},
                           {"theta", number(rep.theta)},
                           {"v", number(rep.v)},
                           {"mean_velocity", number(e.attractor.mean_velocity)},
                           {"cells", e.cells},
                           {"verified", e.verified}});
    }
    const BasinSpec& s = grid.spec;
    return {{"params", to_json(grid.params)},
            {"theta_range", {number(s.theta_min), number(s.theta_max)}},
            {"v_range", {number(s.v_min), number(s.v_max)}},
            {"nx", s.nx},
            {"ny", s.ny},
            {"legend", entries}};
}

void write_states_csv(std::ostream& out, const std::vector<State>& states)
{
    out << "t,theta,v\n";
    for (const State& s : states) out << fmt(s.t) << ',' << fmt(s.theta) << ',' << fmt(s.v) << '\n';
}

void write_branch_csv(std::ostream& out, const Branch& branch)
{
    out << to_string(branch.parameter) << ",theta,v,k,w,stability,mu1_re,mu1_im,mu2_re,mu2_im\n";
    for (const BranchEntry& e : branch.entries) {
        const auto& o = e.orbit;
        out << fmt(e.lambda) << ',' << fmt(o.x0.theta) << ',' << fmt(o.x0.v) << ',' << o.k << ',' << o.w << ','
            << to_string(o.stability);
        for (const auto& m : o.multipliers) out << ',' << fmt(m.real()) << ',' << fmt(m.imag());
        out << '\n';
    }
}

void write_tongue_csv(std::ostream& out, const TongueDiagram& diagram)
{
    out << "label,kind,omega,p,k,w\n";
    for (const Polyline& c : diagram.curves)
        for (const BifurcationPoint& v : c.vertices)
            out << c.label << ',' << to_string(c.kind) << ',' << fmt(v.omega) << ',' << fmt(v.p) << ',' << v.orbit.k
                << ',' << v.orbit.w << '\n';
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows)
{
    out << "p,theta_strobe,kind,k,w\n";
    for (const SweepRow& r : rows)
        out << fmt(r.p) << ',' << fmt(r.theta_strobe) << ',' << to_string(r.kind) << ',' << r.k << ',' << r.w << '\n';
}

void write_basin_csv(std::ostream& out, const BasinGrid& grid)
{
    out << "theta,v,id\n";
    for (int j = 0; j < grid.spec.ny; ++j)
        for (int i = 0; i < grid.spec.nx; ++i)
            out << fmt(grid.theta_at(i)) << ',' << fmt(grid.v_at(j)) << ',' << grid.id(i, j) << '\n';
}

void write_basin_pgm(std::ostream& out, const BasinGrid& grid)
{
    const std::size_t maxval = std::max<std::size_t>(1, grid.legend.size() - (grid.legend.empty() ? 0 : 1));
    if (maxval > 65535) throw Error(ErrorKind::invalid_argument, "too many attractors for a PGM image");
    out << "P5\n" << grid.spec.nx << ' ' << grid.spec.ny << '\n' << maxval << '\n';
    for (int j = grid.spec.ny - 1; j >= 0; --j)
        for (int i = 0; i < grid.spec.nx; ++i) {
            const auto id = static_cast<unsigned>(grid.id(i, j));
            if (maxval > 255) out.put(static_cast<char>(id >> 8));
            out.put(static_cast<char>(id & 0xff));
        }
}

}  // namespace epend::io
