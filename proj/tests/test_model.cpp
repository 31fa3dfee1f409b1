/// Unit tests for the model parameter set, pointwise rates, and reduced ODE.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "redqueen/model.hpp"

using namespace redqueen;

TEST_CASE("parameter validation", "[model]") {
    REQUIRE_NOTHROW(ModelParams{}.validated());

    ModelParams bad;
    bad.mu_H2 = 0.0;
    REQUIRE_THROWS_AS(bad.validated(), config_error);

    bad = ModelParams{};
    bad.n = 3;
    REQUIRE_THROWS_AS(bad.validated(), config_error);

    bad = ModelParams{};
    bad.gamma_H = -1.0;
    REQUIRE_THROWS_AS(bad.validated(), config_error);

    bad = ModelParams{};
    bad.u = {0.0, 0.0};
    REQUIRE_THROWS_AS(bad.validated(), config_error);

    // u is normalized on validation.
    ModelParams p;
    p.u = {3.0, 4.0};
    const ModelParams v = p.validated();
    REQUIRE_THAT(v.u[0], Catch::Matchers::WithinAbs(0.6, 1e-15));
    REQUIRE_THAT(v.u[1], Catch::Matchers::WithinAbs(0.8, 1e-15));
    REQUIRE_THAT(v.mu_H(), Catch::Matchers::WithinRel(std::sqrt(0.1), 1e-15));
}

TEST_CASE("pointwise rates at simple points", "[model]") {
    ModelParams p = ModelParams{}.validated(); // alpha_H=0, beta=1, theta=1
    const Point origin{0.0, 0.0};

    // At x = xbar the cohesion term vanishes.
    REQUIRE(fitness_host(p, {0.3, -0.2}, {0.3, -0.2}) == p.R_H);
    // One unit away from the mean costs beta^2.
    REQUIRE_THAT(fitness_host(p, {1.0, 0.0}, origin),
                 Catch::Matchers::WithinAbs(p.R_H - 1.0, 1e-15));

    // Impact peaks at the pathogen mean with value rho_max.
    REQUIRE(impact(p, {0.5, 0.5}, {0.5, 0.5}) == p.rho_max);
    REQUIRE_THAT(impact(p, {1.5, 0.5}, {0.5, 0.5}),
                 Catch::Matchers::WithinRel(p.rho_max * std::exp(-1.0), 1e-14));

    // Pathogen fitness is maximal at y = xbar - l u.
    p.ell = 0.25;
    REQUIRE(fitness_pathogen(p, {-0.25, 0.0}, origin) == p.R_P);
    REQUIRE_THAT(fitness_pathogen(p, {0.75, 0.0}, origin),
                 Catch::Matchers::WithinAbs(p.R_P - 1.0, 1e-14));
}

TEST_CASE("rates are invariant under simultaneous rotation", "[model]") {
    ModelParams base;
    base.alpha_H = 0.4;
    base.beta = 0.8;
    base.ell = 0.3;
    base.u = {1.0, 2.0};
    const ModelParams p = base.validated();

    std::mt19937 rng(777);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
    std::uniform_real_distribution<double> coord(-2.0, 2.0);
    for (int trial = 0; trial < 50; ++trial) {
        const double a = angle(rng), ca = std::cos(a), sa = std::sin(a);
        auto rot = [&](const Point& v) -> Point {
            return {ca * v[0] - sa * v[1], sa * v[0] + ca * v[1]};
        };
        const Point x{coord(rng), coord(rng)}, xbar{coord(rng), coord(rng)},
            y{coord(rng), coord(rng)}, ybar{coord(rng), coord(rng)};

        ModelParams prot = p;
        prot.u = rot(p.u);

        REQUIRE_THAT(fitness_host(prot, rot(x), rot(xbar)),
                     Catch::Matchers::WithinAbs(fitness_host(p, x, xbar), 1e-12));
        REQUIRE_THAT(impact(prot, rot(x), rot(ybar)),
                     Catch::Matchers::WithinAbs(impact(p, x, ybar), 1e-12));
        REQUIRE_THAT(fitness_pathogen(prot, rot(y), rot(xbar)),
                     Catch::Matchers::WithinAbs(fitness_pathogen(p, y, xbar), 1e-12));
    }
}

TEST_CASE("reduced ODE right-hand side and equilibrium", "[model]") {
    const ModelParams p = ModelParams{}.validated();

    // Guard: the P/H term requires positive host mass.
    REQUIRE_THROWS_AS(ode_rhs(p, {0.0, 1.0}), degenerate_mass_error);
    REQUIRE_THROWS_AS(ode_rhs(p, {-1.0, 1.0}), degenerate_mass_error);

    // Baseline coexistence equilibrium: H = 0.04/0.11, P = 4/0.11.
    const OdeState eq = ode_equilibrium(p);
    REQUIRE_THAT(eq.H, Catch::Matchers::WithinRel(0.04 / 0.11, 1e-14));
    REQUIRE_THAT(eq.P, Catch::Matchers::WithinRel(4.0 / 0.11, 1e-14));

    // The equilibrium residual vanishes on random positive parameter draws.
    std::mt19937 rng(20240915);
    std::uniform_real_distribution<double> d(0.1, 3.0);
    for (int trial = 0; trial < 100; ++trial) {
        ModelParams q;
        q.R_H = d(rng); q.R_P = d(rng);
        q.gamma_H = d(rng); q.gamma_P = d(rng);
        q.rho_max = d(rng);
        const OdeState e = ode_equilibrium(q);
        const OdeState r = ode_rhs(q, e);
        REQUIRE(std::fabs(r.H) < 1e-12);
        REQUIRE(std::fabs(r.P) < 1e-12);
    }
}

TEST_CASE("reduced ODE integrates to its equilibrium", "[model]") {
    const ModelParams p = ModelParams{}.validated();
    const OdeState eq = ode_equilibrium(p);

    const OdeState end = ode_integrate(p, {10.0, 10.0}, 500.0, 0.01);
    REQUIRE_THAT(end.H, Catch::Matchers::WithinRel(eq.H, 1e-6));
    REQUIRE_THAT(end.P, Catch::Matchers::WithinRel(eq.P, 1e-6));

    // Self-convergence: halving dt changes the t=5 state by ~2^4.
    const OdeState c1 = ode_integrate(p, {10.0, 10.0}, 5.0, 0.02);
    const OdeState c2 = ode_integrate(p, {10.0, 10.0}, 5.0, 0.01);
    const OdeState c3 = ode_integrate(p, {10.0, 10.0}, 5.0, 0.005);
    const double e1 = std::fabs(c1.H - c3.H) + std::fabs(c1.P - c3.P);
    const double e2 = std::fabs(c2.H - c3.H) + std::fabs(c2.P - c3.P);
    REQUIRE(e1 / e2 > 8.0); // consistent with 4th-order global accuracy
}
