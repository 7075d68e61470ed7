// Command-line front end: simulate, orbit, continue, scan2d, sweep, basin, avgpredict.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "epend/averaging.hpp"
#include "epend/continuation.hpp"
#include "epend/error.hpp"
#include "epend/explore.hpp"
#include "epend/integrate.hpp"
#include "epend/io.hpp"
#include "epend/orbits.hpp"

namespace fs = std::filesystem;
using namespace epend;
using io::fmt;
using io::json;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_failure = 1;
constexpr int exit_usage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Common {
    std::string config;
    std::optional<double> gamma, p, omega, e, alpha;
    int steps = IntegratorSettings{}.steps_per_period;
    unsigned threads = 0;
    std::string out = ".";
};

void add_common(CLI::App* sub, Common& c)
{
    sub->add_option("--config", c.config, "JSON file with parameters and option defaults");
    sub->add_option("--gamma", c.gamma, "damping");
    sub->add_option("--p", c.p, "forcing amplitude");
    sub->add_option("--omega", c.omega, "forcing frequency");
    sub->add_option("--e", c.e, "ellipticity");
    sub->add_option("--alpha", c.alpha, "phase of the horizontal harmonic (rad)");
    sub->add_option("--steps", c.steps, "RK4 steps per forcing period")->capture_default_str();
    sub->add_option("--threads", c.threads, "worker threads (0 = hardware)")->capture_default_str();
    sub->add_option("--out", c.out, "output directory")->capture_default_str();
}

json load_config(const std::string& path)
{
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config file '" + path + "'");
    try {
        json doc = json::parse(in);
        if (!doc.is_object()) throw UsageError("config file must hold a JSON object");
        return doc;
    } catch (const json::parse_error& err) {
        throw UsageError("config file '" + path + "': " + err.what());
    }
}

std::string config_value(const json& v)
{
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number()) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
        return buf;
    }
    if (v.is_array()) {
        std::string s;
        for (const auto& x : v) s += (s.empty() ? "" : ",") + config_value(x);
        return s;
    }
    throw UsageError("unsupported config value " + v.dump());
}

// Fills options not given on the command line from the config document.
void apply_config(CLI::App* sub, const json& config)
{
    for (const auto& item : config.items()) {
        const std::string& key = item.key();
        if (key == "gamma" || key == "p" || key == "omega" || key == "e" || key == "alpha" || key == "physical") continue;
        CLI::Option* opt = nullptr;
        try {
            opt = sub->get_option("--" + key);
        } catch (const CLI::OptionNotFound&) {
            throw UsageError("unknown config key '" + key + "' for " + sub->get_name());
        }
        if (opt->count() > 0) continue;
        if (opt->get_type_size() == 0) {
            if (item.value().is_boolean() && !item.value().get<bool>()) continue;
            opt->add_result(std::string("true"));
        } else {
            opt->add_result(config_value(item.value()));
        }
        opt->run_callback();
    }
}

PendulumParams resolve_params(const Common& c, const json& config)
{
    json model = json::object();
    for (const char* key : {"gamma", "p", "omega", "e", "alpha", "physical"})
        if (config.contains(key)) model[key] = config.at(key);
    PendulumParams params;
    try {
        params = io::params_from_json(model);
        if (c.gamma) params.gamma = *c.gamma;
        if (c.p) params.p = *c.p;
        if (c.omega) params.omega = *c.omega;
        if (c.e) params.e = *c.e;
        if (c.alpha) params.alpha = *c.alpha;
        return validated(params);
    } catch (const Error& err) {
        throw UsageError(err.what());
    }
}

IntegratorSettings integrator(const Common& c)
{
    IntegratorSettings s;
    s.steps_per_period = c.steps;
    try {
        validate(s);
    } catch (const Error& err) {
        throw UsageError(err.what());
    }
    return s;
}

std::vector<double> parse_list(const std::string& text, const char* what)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw UsageError(std::string("bad number '") + item + "' in " + what);
        }
    }
    return out;
}

State parse_state(const std::string& text, const char* what)
{
    const auto v = parse_list(text, what);
    if (v.size() != 2) throw UsageError(std::string(what) + " expects theta,v");
    return {v[0], v[1], 0.0};
}

// "lo:hi" or "lo:hi:n".
std::vector<double> parse_range(const std::string& text, const char* what, bool need_count)
{
    std::vector<double> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) {
        try {
            parts.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw UsageError(std::string("bad range '") + text + "' for " + what);
        }
    }
    if (parts.size() != (need_count ? 3u : 2u) || !(parts[1] >= parts[0]))
        throw UsageError(std::string(what) + (need_count ? " expects lo:hi:n" : " expects lo:hi") + " with lo <= hi");
    return parts;
}

std::vector<double> linspace(const std::vector<double>& r, const char* what)
{
    const int n = static_cast<int>(r[2]);
    if (n < 1 || n != r[2]) throw UsageError(std::string(what) + " needs a positive integer count");
    if (n == 1) return {r[0]};
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) out[i] = r[0] + (r[1] - r[0]) * i / (n - 1);
    return out;
}

fs::path output_dir(const Common& c)
{
    fs::path dir(c.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw UsageError("output directory '" + c.out + "' is not writable");
    return dir;
}

void write_file(const fs::path& path, const std::string& body)
{
    std::ofstream out(path, std::ios::binary);
    out << body;
    if (!out) throw std::runtime_error("failed to write " + path.string());
}

template <typename Fn>
std::string render(Fn&& fn)
{
    std::ostringstream out;
    fn(out);
    return out.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Elliptically driven pendulum: simulation, periodic orbits, continuation and basins"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    Common common;

    auto* simulate = app.add_subcommand("simulate", "integrate a trajectory; writes trajectory.csv and strobes.csv");
    add_common(simulate, common);
    std::string sim_ic = "0.1,0";
    double sim_periods = 50;
    int sim_stride = 1;
    simulate->add_option("--ic", sim_ic, "initial state theta,v")->capture_default_str();
    simulate->add_option("--periods", sim_periods, "forcing periods to integrate")->capture_default_str();
    simulate->add_option("--stride", sim_stride, "keep every n-th step")->capture_default_str();

    auto* orbit = app.add_subcommand("orbit", "Newton shooting for a periodic orbit; writes orbit.json");
    add_common(orbit, common);
    std::string orb_guess = "0,0";
    int orb_k = 1, orb_w = 0;
    orbit->add_option("--guess", orb_guess, "initial guess theta,v")->capture_default_str();
    orbit->add_option("--k", orb_k, "period in forcing periods")->capture_default_str();
    orbit->add_option("--w", orb_w, "winding number")->capture_default_str();

    auto* cont = app.add_subcommand("continue", "pseudo-arclength continuation; writes branch.csv and events.json");
    add_common(cont, common);
    std::string cont_guess, cont_param = "p", cont_range = "0:2";
    int cont_k = 1, cont_w = 0, cont_dir = 1;
    cont->add_option("--guess", cont_guess, "initial guess theta,v (default: averaging or simulation seed)");
    cont->add_option("--k", cont_k, "period in forcing periods")->capture_default_str();
    cont->add_option("--w", cont_w, "winding number")->capture_default_str();
    cont->add_option("--param", cont_param, "continuation parameter")->check(CLI::IsMember({"p", "omega"}))->capture_default_str();
    cont->add_option("--range", cont_range, "parameter interval lo:hi")->capture_default_str();
    cont->add_option("--direction", cont_dir, "+1 or -1")->check(CLI::IsMember({-1, 1}))->capture_default_str();

    auto* scan = app.add_subcommand("scan2d", "tongue diagram in (omega, p); writes tongue.csv and tongue.json");
    add_common(scan, common);
    std::string scan_omega = "0.5:3.0:126";
    double scan_pmax = 2.0;
    bool scan_no_rot = false, scan_pd = false;
    scan->add_option("--omega-grid", scan_omega, "omega grid lo:hi:n")->capture_default_str();
    scan->add_option("--pmax", scan_pmax, "largest forcing amplitude")->capture_default_str();
    scan->add_flag("--no-rotations", scan_no_rot, "skip the w = +-1 rotations");
    scan->add_flag("--period-doubling", scan_pd, "also follow period-two branches");

    auto* sweep = app.add_subcommand("sweep", "attractors along p; writes sweep.csv");
    add_common(sweep, common);
    std::string sweep_range = "0:2:101";
    std::vector<std::string> sweep_ics;
    int sweep_transient = default_transient_periods, sweep_record = 64;
    sweep->add_option("--prange", sweep_range, "p grid lo:hi:n")->capture_default_str();
    sweep->add_option("--ic", sweep_ics, "initial state theta,v (repeatable)")->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    sweep->add_option("--transient", sweep_transient, "transient periods")->capture_default_str();
    sweep->add_option("--record", sweep_record, "recorded periods")->capture_default_str();

    auto* bas = app.add_subcommand("basin", "basins of attraction; writes basin.pgm, basin.csv and basin.json");
    add_common(bas, common);
    BasinSpec bspec;
    std::string bas_theta = "-pi:pi", bas_v = "-4:4";
    int bas_steps = bspec.protocol.integrator.steps_per_period;
    bas->add_option("--theta-range", bas_theta, "theta window lo:hi")->capture_default_str();
    bas->add_option("--v-range", bas_v, "velocity window lo:hi")->capture_default_str();
    bas->add_option("--nx", bspec.nx, "cells along theta")->capture_default_str();
    bas->add_option("--ny", bspec.ny, "cells along v")->capture_default_str();
    bas->add_option("--transient", bspec.protocol.n_transient, "transient periods")->capture_default_str();
    bas->add_option("--record", bspec.protocol.n_record, "recorded periods")->capture_default_str();
    bas->add_option("--discovery", bspec.discovery_n, "side of the attractor discovery subgrid")->capture_default_str();
    bas->add_option("--basin-steps", bas_steps, "RK4 steps per period for basin cells")->capture_default_str();

    auto* avg = app.add_subcommand("avgpredict", "averaging prediction of rotation folds; prints JSON");
    add_common(avg, common);

    const auto t0 = std::chrono::steady_clock::now();
    try {
        try {
            app.parse(argc, argv);
        } catch (const CLI::CallForHelp& e) {
            return app.exit(e);
        } catch (const CLI::CallForAllHelp& e) {
            return app.exit(e);
        } catch (const CLI::ParseError& e) {
            app.exit(e);
            return exit_usage;
        }

        CLI::App* sub = app.get_subcommands().front();
        const json config = load_config(common.config);
        apply_config(sub, config);
        const PendulumParams params = resolve_params(common, config);
        const IntegratorSettings settings = integrator(common);

        if (sub == avg) {
            auto pred = averaged_prediction(params.gamma, params.e, params.alpha, params.omega,
                                            common.p ? std::optional<double>(params.p) : std::nullopt);
            std::cout << io::to_json(pred).dump() << '\n';
            return exit_ok;
        }

        const fs::path dir = output_dir(common);

        if (sub == simulate) {
            if (!(sim_periods > 0) || sim_stride < 1) throw UsageError("--periods must be positive and --stride >= 1");
            const State ic = parse_state(sim_ic, "--ic");
            const auto traj = trajectory(params, ic, sim_periods * params.period(), settings, sim_stride);
            const int n_strobes = static_cast<int>(sim_periods + 1e-9);
            std::vector<State> strobes{ic};
            const StroboscopicMap map(params, settings);
            for (int j = 0; j < n_strobes; ++j) strobes.push_back(map.advance(strobes.back(), 1));
            write_file(dir / "trajectory.csv", render([&](auto& o) { io::write_states_csv(o, traj); }));
            write_file(dir / "strobes.csv", render([&](auto& o) { io::write_states_csv(o, strobes); }));
            std::cout << "simulate: " << traj.size() << " samples, " << strobes.size() << " strobes, final theta="
                      << fmt(traj.back().theta) << " v=" << fmt(traj.back().v) << ", " << fmt(seconds_since(t0))
                      << " s\n";
            return exit_ok;
        }

        if (sub == orbit) {
            const auto o = find_orbit(params, parse_state(orb_guess, "--guess"), orb_k, orb_w, settings);
            const json doc = io::to_json(o);
            write_file(dir / "orbit.json", doc.dump(2) + "\n");
            std::cout << doc.dump() << '\n';
            std::cout << "orbit: k=" << o.k << " w=" << o.w << " " << to_string(o.stability) << ", "
                      << o.iterations << " Newton iterations, " << fmt(seconds_since(t0)) << " s\n";
            return exit_ok;
        }

        if (sub == cont) {
            const auto range = parse_range(cont_range, "--range", false);
            const auto which = cont_param == "p" ? ContinuationParameter::p : ContinuationParameter::omega;
            std::optional<PeriodicOrbit> seed;
            if (!cont_guess.empty())
                seed = find_orbit(params, parse_state(cont_guess, "--guess"), cont_k, cont_w, settings);
            else if (cont_k == 1 && cont_w != 0)
                seed = seed_rotation(params, cont_w, settings);
            else if (cont_w == 0)
                seed = find_orbit(params, State{}, cont_k, 0, settings);
            if (!seed) throw Error(ErrorKind::newton_diverged, "no periodic orbit found to start from");
            const Branch branch = continue_branch(params, *seed, which, range[0], range[1], cont_dir, {}, settings);
            const auto events = locate_events(branch);
            json doc = {{"params", io::to_json(params)},
                        {"parameter", std::string(to_string(which))},
                        {"partial", branch.truncated},
                        {"stop_reason", branch.stop_reason},
                        {"events", json::array()}};
            for (const auto& ev : events) doc["events"].push_back(io::to_json(ev));
            write_file(dir / "branch.csv", render([&](auto& o) { io::write_branch_csv(o, branch); }));
            write_file(dir / "events.json", doc.dump(2) + "\n");
            std::cout << "continue: " << branch.entries.size() << " points, " << events.size()
                      << " bifurcation points" << (branch.truncated ? " (partial: " + branch.stop_reason + ")" : "")
                      << ", " << fmt(seconds_since(t0)) << " s\n";
            return branch.truncated ? exit_failure : exit_ok;
        }

        if (sub == scan) {
            ScanOptions options;
            options.rotations = !scan_no_rot;
            options.follow_period_doubling = scan_pd;
            options.threads = common.threads;
            options.integrator = settings;
            const auto grid = linspace(parse_range(scan_omega, "--omega-grid", true), "--omega-grid");
            const auto diagram = tongue_scan(params, params.e, grid, scan_pmax, options);
            write_file(dir / "tongue.csv", render([&](auto& o) { io::write_tongue_csv(o, diagram); }));
            write_file(dir / "tongue.json", io::to_json(diagram).dump(2) + "\n");
            std::size_t points = 0;
            for (const auto& s : diagram.slices) points += s.points.size();
            std::cout << "scan2d: " << grid.size() << " omega values, " << points << " bifurcation points, "
                      << diagram.curves.size() << " curves" << (diagram.partial ? " (partial)" : "") << ", "
                      << fmt(seconds_since(t0)) << " s\n";
            return diagram.partial ? exit_failure : exit_ok;
        }

        if (sub == sweep) {
            SweepOptions options;
            options.protocol.n_transient = sweep_transient;
            options.protocol.n_record = sweep_record;
            options.protocol.integrator = settings;
            options.threads = common.threads;
            std::vector<State> ics;
            for (const auto& s : sweep_ics) ics.push_back(parse_state(s, "--ic"));
            const auto ps = linspace(parse_range(sweep_range, "--prange", true), "--prange");
            std::vector<SweepRow> rows;
            try {
                rows = sweep_amplitude(params, params.omega, ps, ics, options);
            } catch (const Error& err) {
                if (err.kind() == ErrorKind::invalid_argument) throw UsageError(err.what());
                throw;
            }
            write_file(dir / "sweep.csv", render([&](auto& o) { io::write_sweep_csv(o, rows); }));
            std::size_t aperiodic = 0;
            for (const auto& r : rows) aperiodic += r.kind == AttractorKind::aperiodic;
            std::cout << "sweep: " << ps.size() << " p values, " << rows.size() << " strobe points (" << aperiodic
                      << " aperiodic), " << fmt(seconds_since(t0)) << " s\n";
            return exit_ok;
        }

        if (sub == bas) {
            if (bas_theta != "-pi:pi") {
                const auto tr = parse_range(bas_theta, "--theta-range", false);
                bspec.theta_min = tr[0];
                bspec.theta_max = tr[1];
            }
            const auto vr = parse_range(bas_v, "--v-range", false);
            bspec.v_min = vr[0];
            bspec.v_max = vr[1];
            bspec.protocol.integrator.steps_per_period = bas_steps;
            bspec.threads = common.threads;
            BasinGrid grid;
            try {
                grid = basin(params, bspec);
            } catch (const Error& err) {
                if (err.kind() == ErrorKind::invalid_argument) throw UsageError(err.what());
                throw;
            }
            write_file(dir / "basin.pgm", render([&](auto& o) { io::write_basin_pgm(o, grid); }));
            write_file(dir / "basin.csv", render([&](auto& o) { io::write_basin_csv(o, grid); }));
            write_file(dir / "basin.json", io::legend_json(grid).dump(2) + "\n");
            std::cout << "basin: " << grid.spec.nx << "x" << grid.spec.ny << " cells, " << grid.legend.size()
                      << " attractors, rotation cells -/+ " << grid.rotation_cells(-1) << "/"
                      << grid.rotation_cells(1) << ", " << fmt(seconds_since(t0)) << " s\n";
            return exit_ok;
        }
    } catch (const UsageError& err) {
        std::cerr << "error: " << err.what() << "\n\n" << app.get_subcommands().front()->help();
        return exit_usage;
    } catch (const Error& err) {
        std::cerr << "error: " << err.what() << '\n';
        return err.kind() == ErrorKind::invalid_argument ? exit_usage : exit_failure;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return exit_failure;
    }
    return exit_usage;
}
