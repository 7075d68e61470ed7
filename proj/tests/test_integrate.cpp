#include <doctest.h>

#include <cmath>

#include "epend/error.hpp"
#include "epend/integrate.hpp"
#include "oracles.hpp"

using namespace epend;

namespace {

double energy(const State& s) { return 0.5 * s.v * s.v + (1.0 - std::cos(s.theta)); }

}  // namespace

TEST_SUITE("integrate")
{
    TEST_CASE("energy is conserved without damping or forcing")
    {
        const PendulumParams params{.gamma = 0.0, .p = 0.0, .omega = 2.0};
        const State s0{0.3, 0.0, 0.0};
        const auto traj = trajectory(params, s0, 100 * params.period(), {}, 64);
        double worst = 0.0;
        for (const State& s : traj) worst = std::max(worst, std::abs(energy(s) - energy(s0)));
        CHECK(worst < 1e-8);
    }

    TEST_CASE("energy decreases with damping")
    {
        const PendulumParams params{.gamma = 0.1, .p = 0.0, .omega = 2.0};
        const auto traj = trajectory(params, State{1.0, 0.5, 0.0}, 20 * params.period(), {}, 16);
        for (std::size_t i = 1; i < traj.size(); ++i) CHECK(energy(traj[i]) < energy(traj[i - 1]));
    }

    TEST_CASE("fourth-order convergence")
    {
        const PendulumParams params{.gamma = 0.1, .p = 0.5, .omega = 2.0, .e = 0.1};
        const State s0{0.5, 0.2, 0.0};
        State x[3];
        for (int n = 0; n < 3; ++n) x[n] = strobe(params, s0, 3, {.steps_per_period = 64 << n}).state;
        const double d1 = std::hypot(x[0].theta - x[1].theta, x[0].v - x[1].v);
        const double d2 = std::hypot(x[1].theta - x[2].theta, x[1].v - x[2].v);
        const double order = std::log2(d1 / d2);
        CHECK(order >= 3.7);
        CHECK(order <= 4.3);
    }

    TEST_CASE("the hanging state is invariant when e = 0")
    {
        for (double p : {0.0, 0.3, 1.7})
            for (int k : {1, 4}) {
                const State s = strobe({.gamma = 0.1, .p = p, .omega = 1.3}, State{}, k).state;
                CHECK(s.theta == 0.0);
                CHECK(s.v == 0.0);
            }
    }

    TEST_CASE("monodromy against finite differences and the determinant identity")
    {
        for (double e : {0.0, 0.3}) {
            const PendulumParams params{.gamma = 0.15, .p = 0.9, .omega = 1.7, .e = e, .alpha = 0.4};
            const State s{0.8, -0.6, 0.0};
            for (int k : {1, 2}) {
                const Mat2 m = *strobe(params, s, k, {}, true).monodromy;
                const double h = 1e-6;
                for (int col = 0; col < 2; ++col) {
                    State a = s, b = s;
                    (col == 0 ? a.theta : a.v) += h;
                    (col == 0 ? b.theta : b.v) -= h;
                    const State fa = strobe(params, a, k).state, fb = strobe(params, b, k).state;
                    CHECK(std::abs((fa.theta - fb.theta) / (2 * h) - m(0, col)) <= 1e-5 * norm(m));
                    CHECK(std::abs((fa.v - fb.v) / (2 * h) - m(1, col)) <= 1e-5 * norm(m));
                }
                CHECK(m.det() == doctest::Approx(std::exp(-params.gamma * k * params.period())).epsilon(1e-6));
            }
        }
    }

    TEST_CASE("strobe map agrees with the plain flow")
    {
        const PendulumParams params{.gamma = 0.1, .p = 0.8, .omega = 1.8, .e = 0.1};
        const State s0{0.2, -1.0, 0.0};
        const State a = strobe(params, s0, 5).state;
        const State b = flow(params, s0, 5 * params.period());
        CHECK(a.theta == doctest::Approx(b.theta).epsilon(1e-12));
        CHECK(a.v == doctest::Approx(b.v).epsilon(1e-12));
        CHECK(a.t == doctest::Approx(5 * params.period()));
    }

    TEST_CASE("trajectory lands on the requested end time")
    {
        const PendulumParams params{.gamma = 0.1, .p = 0.3, .omega = 2.0};
        const double t_final = 2.345;
        const auto every = trajectory(params, State{0.1, 0, 0}, t_final);
        const auto sparse = trajectory(params, State{0.1, 0, 0}, t_final, {}, 7);
        CHECK(every.back().t == t_final);
        CHECK(sparse.back().t == t_final);
        CHECK(sparse.back().theta == every.back().theta);
        CHECK(flow(params, State{0.1, 0, 0}, t_final).v == every.back().v);
        CHECK(every.front().t == 0.0);
    }

    TEST_CASE("strobe points settle on the origin below the 1:2 tongue")
    {
        // The linearization at the origin must be stable here for the check to mean anything.
        REQUIRE(oracle::mathieu_spectral_radius(0.1, 0.2, 1.8) < 1.0);
        const auto rec = record_strobes({.gamma = 0.1, .p = 0.2, .omega = 1.8}, State{0.01 * pi, 0, 0},
                                        default_transient_periods, 64);
        REQUIRE(rec.size() == 64);
        for (const State& s : rec) {
            CHECK(std::abs(s.theta) < 1e-6);
            CHECK(std::abs(s.v) < 1e-6);
        }
        CHECK(default_transient_periods == 1000);
    }

    TEST_CASE("refinement converges")
    {
        const PendulumParams params{.gamma = 0.1, .p = 1.2, .omega = 1.8, .e = 0.1};
        const IntegratorSettings s = refine_until_converged(params, State{0.5, 0.5, 0}, 2, {.steps_per_period = 64});
        CHECK(s.steps_per_period >= 128);
        const State a = strobe(params, State{0.5, 0.5, 0}, 2, s).state;
        const State b = strobe(params, State{0.5, 0.5, 0}, 2, {.steps_per_period = 2 * s.steps_per_period}).state;
        CHECK(std::abs(a.theta - b.theta) < 1e-8);
    }

    TEST_CASE("errors")
    {
        CHECK_THROWS_AS(validate({.steps_per_period = 32}), Error);
        try {
            strobe({.gamma = 0.0, .p = 1e12, .omega = 1.0}, State{1.0, 0, 0}, 1);
            FAIL("expected blow-up");
        } catch (const Error& err) {
            CHECK(err.kind() == ErrorKind::blow_up);
            CHECK(err.value() > 0.0);
        }
    }
}
