#include <doctest.h>

#include <random>

#include "epend/error.hpp"
#include "epend/model.hpp"
#include "oracles.hpp"

using namespace epend;

TEST_SUITE("model")
{
    TEST_CASE("rhs matches a term-by-term evaluation")
    {
        const PendulumParams params{.gamma = 0.1, .p = 0.8, .omega = 1.8, .e = 0.1};
        const Vec2 f = eval_rhs(params, State{0.3, -0.2, 0.7});
        const auto [dtheta, dv] = oracle::pendulum_rhs(0.1, 0.8, 1.8, 0.1, pi / 2, 0.3, -0.2, 0.7);
        CHECK(f[0] == doctest::Approx(dtheta).epsilon(1e-14));
        CHECK(f[1] == doctest::Approx(dv).epsilon(1e-14));

        std::mt19937 rng(3);
        std::uniform_real_distribution<double> u(-3.0, 3.0);
        for (int n = 0; n < 100; ++n) {
            const PendulumParams q{.gamma = std::abs(u(rng)) / 10, .p = std::abs(u(rng)), .omega = 1 + std::abs(u(rng)),
                                   .e = u(rng) / 3, .alpha = u(rng)};
            const State s{u(rng), u(rng), 5 + u(rng)};
            const auto ref = oracle::pendulum_rhs(q.gamma, q.p, q.omega, q.e, q.alpha, s.theta, s.v, s.t);
            CHECK(eval_rhs(q, s)[1] == doctest::Approx(ref.second).epsilon(1e-12));
        }
    }

    TEST_CASE("hanging equilibrium and the horizontal drive at theta = 0")
    {
        const Vec2 rest = eval_rhs({.gamma = 0.1, .p = 1, .omega = 2, .e = 0}, State{0, 0, 0});
        CHECK(rest[0] == 0.0);
        CHECK(rest[1] == 0.0);
        const Vec2 f = eval_rhs({.gamma = 0.1, .p = 1, .omega = 2, .e = 0.5}, State{0, 0, pi / 4});
        CHECK(f[0] == 0.0);
        CHECK(f[1] == doctest::Approx(-0.5).epsilon(1e-15));
    }

    TEST_CASE("general forcing reproduces the elliptic model")
    {
        const PendulumParams params{.gamma = 0.1, .p = 1.0, .omega = 2.0, .e = 0.1};
        const ForcingSpec elliptic = ForcingSpec::elliptic(params);
        std::mt19937 rng(11);
        std::uniform_real_distribution<double> u(-4.0, 4.0);
        for (int n = 0; n < 100; ++n) {
            const State s{u(rng), u(rng), 10 + u(rng)};
            const Vec2 a = eval_rhs(params, s), b = eval_rhs_general(elliptic, params.gamma, s);
            CHECK(std::abs(a[0] - b[0]) <= 1e-12);
            CHECK(std::abs(a[1] - b[1]) <= 1e-12);
        }

        // Tables agree with the closed form at their nodes.
        const int m = 64;
        const PendulumParams vertical = params.with_e(0.0);
        std::vector<double> fx(m, 0.0), fy(m);
        for (int j = 0; j < m; ++j) fy[j] = (vertical.p * std::cos(two_pi * j / m) + 1.0) / vertical.omega;
        const ForcingSpec table = ForcingSpec::sampled(fx, fy, vertical.omega);
        for (int j : {0, 5, 17, 63}) {
            const State s{0.7, -0.3, j * vertical.period() / m};
            CHECK(eval_rhs_general(table, 0.1, s)[1] == doctest::Approx(eval_rhs(vertical, s)[1]).epsilon(1e-12));
        }

        const ForcingSpec gravity = ForcingSpec::sampled(std::vector<double>(8, 0.0), std::vector<double>(8, 0.5), 2.0);
        CHECK(eval_rhs_general(gravity, 0.1, State{pi / 2, 0, 0.3})[1] == doctest::Approx(-1.0));
    }

    TEST_CASE("jacobian")
    {
        const Mat2 j0 = eval_jacobian({.gamma = 0.2, .p = 0.7, .omega = 1.3, .e = 0}, State{0, 0, 0});
        CHECK(j0(0, 0) == 0.0);
        CHECK(j0(0, 1) == 1.0);
        CHECK(j0(1, 0) == doctest::Approx(-1.7));
        CHECK(j0(1, 1) == doctest::Approx(-0.2));

        const Mat2 free = eval_jacobian({.gamma = 0.2, .p = 0, .omega = 1.3, .e = 0}, State{1.1, 0.4, 2.0});
        CHECK(free(1, 0) == doctest::Approx(-std::cos(1.1)));

        std::mt19937 rng(5);
        std::uniform_real_distribution<double> u(-2.0, 2.0);
        for (int n = 0; n < 50; ++n) {
            const PendulumParams q{.gamma = 0.1, .p = 1 + u(rng) / 2, .omega = 2 + u(rng) / 2, .e = u(rng) / 4,
                                   .alpha = u(rng)};
            const State s{u(rng), u(rng), 3 + u(rng)};
            const Mat2 jac = eval_jacobian(q, s);
            const double h = 1e-6;
            for (int col = 0; col < 2; ++col) {
                State a = s, b = s;
                (col == 0 ? a.theta : a.v) += h;
                (col == 0 ? b.theta : b.v) -= h;
                const Vec2 fa = eval_rhs(q, a), fb = eval_rhs(q, b);
                for (int row = 0; row < 2; ++row) {
                    const double fd = (fa[row] - fb[row]) / (2 * h);
                    CHECK(std::abs(fd - jac(row, col)) <= 1e-5 * std::max(1.0, std::abs(jac(row, col))));
                }
            }
        }
    }

    TEST_CASE("nondimensionalize")
    {
        const PendulumParams q = nondimensionalize({.m = 0.5, .l = 0.3, .c = 0.01, .a = 0.005, .b = 0.001, .Omega = 11.44});
        CHECK(q.gamma == doctest::Approx(0.03886096759903717).epsilon(1e-13));
        CHECK(q.omega == doctest::Approx(2.000562611998433).epsilon(1e-13));
        CHECK(q.p == doctest::Approx(0.06670417940876655).epsilon(1e-13));
        CHECK(q.e == doctest::Approx(0.2).epsilon(1e-13));
        CHECK(q.alpha == doctest::Approx(pi / 2));

        const double g = 9.81, l = 9.81, Omega = 2 * std::sqrt(g / l);
        const PendulumParams unit = nondimensionalize({.m = 1, .l = l, .c = 0, .a = g / (Omega * Omega), .b = 0, .Omega = Omega});
        CHECK(unit.gamma == 0.0);
        CHECK(unit.p == doctest::Approx(1.0));
        CHECK(unit.omega == doctest::Approx(2.0));
        CHECK(unit.e == 0.0);

        PhysicalParams phys{.m = 0.5, .l = 0.3, .c = 0.01, .a = 0.005, .b = 0.001, .Omega = 11.44};
        const PendulumParams before = nondimensionalize(phys);
        phys.m *= 2;
        const PendulumParams after = nondimensionalize(phys);
        CHECK(after.gamma == doctest::Approx(before.gamma / 2));
        CHECK(after.p == before.p);
        CHECK(after.omega == before.omega);
        CHECK(after.e == before.e);

        try {
            nondimensionalize({.a = 0.0, .b = 0.01});
            FAIL("expected an error");
        } catch (const Error& err) {
            CHECK(err.kind() == ErrorKind::invalid_argument);
            CHECK(std::string(err.what()).find("horizontal-only") != std::string::npos);
        }
    }

    TEST_CASE("reflection")
    {
        const State zero = reflect(State{0, 0, 4.0});
        CHECK(zero.theta == 0.0);
        CHECK(zero.v == 0.0);
        CHECK(zero.t == 4.0);
        const State r = reflect(State{1.2, -0.4, 3.0});
        CHECK(r.theta == -1.2);
        CHECK(r.v == 0.4);
        CHECK(r.t == 3.0);
        const State back = reflect(r);
        CHECK(back.theta == 1.2);
        CHECK(back.v == -0.4);
    }

    TEST_CASE("parameter validation")
    {
        CHECK_THROWS_AS(validated({.omega = 0.0}), Error);
        CHECK_THROWS_AS(validated({.gamma = -0.1}), Error);
        CHECK_THROWS_AS(validated({.p = -1.0}), Error);
        CHECK_THROWS_AS(validated({.e = NAN}), Error);
        CHECK(validated({.alpha = 3 * pi / 2}).alpha == doctest::Approx(-pi / 2));
        CHECK(wrap_to_pi(pi) == doctest::Approx(-pi));
        CHECK(wrap_to_pi(7.0) == doctest::Approx(7.0 - two_pi));
    }
}
