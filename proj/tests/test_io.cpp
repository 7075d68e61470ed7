#include <doctest.h>

#include <sstream>

#include "epend/error.hpp"
#include "epend/io.hpp"

using namespace epend;
using io::json;

TEST_SUITE("io")
{
    TEST_CASE("number formatting")
    {
        CHECK(io::fmt(1.0 / 3.0) == "0.333333333333");
        CHECK(io::fmt(2.0) == "2");
        CHECK(io::round12(0.1 + 0.2) == 0.3);
    }

    TEST_CASE("parameters from json")
    {
        const PendulumParams q = io::params_from_json(json::parse(R"({"gamma":0.2,"p":0.7,"omega":1.5,"e":0.05})"));
        CHECK(q.gamma == 0.2);
        CHECK(q.p == 0.7);
        CHECK(q.omega == 1.5);
        CHECK(q.e == 0.05);
        CHECK(q.alpha == doctest::Approx(pi / 2));

        const PendulumParams phys = io::params_from_json(
            json::parse(R"({"physical":{"m":1,"l":1,"c":0.2,"a":0.125,"b":0.0125,"Omega":4,"g":4}})"));
        CHECK(phys.gamma == 0.1);
        CHECK(phys.omega == 2.0);
        CHECK(phys.p == 0.5);
        CHECK(phys.e == 0.1);

        CHECK_THROWS_AS(io::params_from_json(json::parse(R"({"p":0.5,"physical":{"a":0.1}})")), Error);
        CHECK_THROWS_AS(io::params_from_json(json::parse(R"({"q":0.5})")), Error);
        CHECK_THROWS_AS(io::params_from_json(json::parse(R"({"p":"big"})")), Error);
        CHECK_THROWS_AS(io::params_from_json(json::parse(R"({"omega":-1})")), Error);
    }

    TEST_CASE("orbit record")
    {
        const PendulumParams params{.gamma = 0.1, .p = 0.6, .omega = 2.0};
        State guess = record_strobes(params, State{0.01 * pi, -2.5, 0}, 300, 1).back();
        guess.t = 0.0;
        const PeriodicOrbit o = find_orbit(params, guess, 1, -1);
        const json j = io::to_json(o);
        for (const char* key : {"theta0", "v0", "k", "w", "mu", "stability", "residual"}) CHECK(j.contains(key));
        CHECK(j.size() == 7);
        CHECK(j["mu"].size() == 2);
        CHECK(j["mu"][0].contains("re"));
        CHECK(j["mu"][0].contains("im"));
        CHECK(j["w"] == -1);
        CHECK(j["stability"] == "stable");
    }

    TEST_CASE("averaging prediction document")
    {
        const json j = io::to_json(averaged_prediction(0.1, 0.1, 1.5708, 2.0));
        CHECK(j["p_fold_negative"].get<double>() == doctest::Approx(0.3636).epsilon(1e-4));
        CHECK(j["p_fold_positive"].get<double>() == doctest::Approx(0.4444).epsilon(1e-4));
        CHECK(j["phi0"].is_array());
    }

    TEST_CASE("csv and pgm layouts")
    {
        std::ostringstream states;
        io::write_states_csv(states, {State{0, 0.1, 0}, State{0.5, 0.2, -0.3}});
        CHECK(states.str() == "t,theta,v\n0,0,0.1\n-0.3,0.5,0.2\n");

        std::ostringstream sweep;
        io::write_sweep_csv(sweep, {SweepRow{0.5, 0, 1.25, AttractorKind::rotation, 1, -1}});
        CHECK(sweep.str() == "p,theta_strobe,kind,k,w\n0.5,1.25,rotation,1,-1\n");

        BasinSpec spec;
        spec.nx = spec.ny = 16;
        spec.discovery_n = 4;
        const BasinGrid g = basin({.gamma = 0.1, .p = 0.2, .omega = 1.8}, spec);
        std::ostringstream pgm, csv;
        io::write_basin_pgm(pgm, g);
        io::write_basin_csv(csv, g);
        const std::string header = "P5\n16 16\n1\n";
        CHECK(pgm.str().substr(0, header.size()) == header);
        CHECK(pgm.str().size() == header.size() + 256);
        CHECK(csv.str().rfind("theta,v,id\n", 0) == 0);
        const json legend = io::legend_json(g);
        CHECK(legend["legend"].size() == g.legend.size());
        CHECK(legend["nx"] == 16);
    }
}
