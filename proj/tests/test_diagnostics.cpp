/// Unit tests for the trajectory diagnostics: synthetic motions with known
/// speed/delay/radius, shape scores, and the regime decision tree.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "redqueen/diagnostics.hpp"

using namespace redqueen;

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Trajectory make_traj(int n, int m = 17) {
    return Trajectory{Grid(n, -6.0, 6.0, m), 0.1, {}, {}};
}

void push_sample(Trajectory& traj, double t, Point xbar,
                 Point ybar = {std::nan(""), std::nan("")}) {
    traj.samples.push_back({t, 1.0, 1.0, xbar, ybar});
}

Field gaussian_field(const Grid& g, const Point& c, double s) {
    Field f(g.size());
    for (std::size_t i = 0; i < f.size(); ++i)
        f[i] = std::exp(-norm2(sub(g.point(i), c), g.n) / (2.0 * s * s));
    return f;
}

Field annulus_field(const Grid& g, double R) {
    Field f(g.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double r = std::sqrt(norm2(g.point(i), g.n));
        f[i] = std::exp(-(r - R) * (r - R) / 0.18);
    }
    return f;
}

}  // namespace

TEST_CASE("linear speed fit on synthetic lines", "[diagnostics]") {
    Trajectory traj = make_traj(2);
    for (double t = 0.0; t <= 10.0 + 1e-12; t += 0.25)
        push_sample(traj, t, {0.1 * t, 0.0});
    const TimeWindow w{0.0, 10.0};

    const LinearFit f = fit_linear_speed(traj, w);
    REQUIRE_THAT(f.c_fit, WithinRel(0.1, 1e-12));
    REQUIRE_THAT(f.direction[0], WithinAbs(1.0, 1e-12));
    REQUIRE_THAT(f.direction[1], WithinAbs(0.0, 1e-12));
    REQUIRE(f.r2 >= 1.0 - 1e-12);

    // Exact invariance under time translation.
    Trajectory shifted = make_traj(2);
    for (const TrajectorySample& s : traj.samples) push_sample(shifted, s.t + 100.0, s.xbar);
    const LinearFit fs = fit_linear_speed(shifted, {100.0, 110.0});
    REQUIRE_THAT(fs.c_fit, WithinAbs(f.c_fit, 1e-12));
    REQUIRE_THAT(fs.r2, WithinAbs(f.r2, 1e-12));

    // Exact invariance under rigid rotation: the direction co-rotates.
    const double a = 0.7, ca = std::cos(a), sa = std::sin(a);
    Trajectory rot = make_traj(2);
    for (const TrajectorySample& s : traj.samples)
        push_sample(rot, s.t, {ca * s.xbar[0] - sa * s.xbar[1], sa * s.xbar[0] + ca * s.xbar[1]});
    const LinearFit fr = fit_linear_speed(rot, w);
    REQUIRE_THAT(fr.c_fit, WithinAbs(f.c_fit, 1e-12));
    REQUIRE_THAT(fr.direction[0], WithinAbs(ca, 1e-12));
    REQUIRE_THAT(fr.direction[1], WithinAbs(sa, 1e-12));

    // Motion toward negative x: positive speed, flipped direction.
    Trajectory neg = make_traj(2);
    for (double t = 0.0; t <= 10.0 + 1e-12; t += 0.25) push_sample(neg, t, {-0.3 * t, 2.0});
    const LinearFit fn = fit_linear_speed(neg, w);
    REQUIRE_THAT(fn.c_fit, WithinRel(0.3, 1e-12));
    REQUIRE_THAT(fn.direction[0], WithinAbs(-1.0, 1e-12));

    // Window filtering and the sample-count guard.
    REQUIRE_THAT(fit_linear_speed(traj, {6.0, 10.0}).c_fit, WithinRel(0.1, 1e-12));
    REQUIRE_THROWS_AS(fit_linear_speed(traj, {9.8, 10.0}), config_error);

    // Coinciding samples: no motion, no line evidence.
    Trajectory still = make_traj(2);
    for (double t = 0.0; t <= 10.0; t += 0.5) push_sample(still, t, {0.4, -0.2});
    const LinearFit f0 = fit_linear_speed(still, w);
    REQUIRE(f0.c_fit == 0.0);
    REQUIRE(f0.r2 == 0.0);

    // One dimension: trivially collinear.
    Trajectory one = make_traj(1);
    for (double t = 0.0; t <= 10.0 + 1e-12; t += 0.25) push_sample(one, t, {-0.2 * t, 0.0});
    const LinearFit f1 = fit_linear_speed(one, w);
    REQUIRE_THAT(f1.c_fit, WithinRel(0.2, 1e-12));
    REQUIRE(f1.direction[0] == -1.0);
    REQUIRE(f1.r2 == 1.0);
}

TEST_CASE("linear fit rejects circular motion", "[diagnostics]") {
    Trajectory traj = make_traj(2);
    for (double t = 0.0; t <= 12.6; t += 0.2)
        push_sample(traj, t, {2.0 * std::cos(t), 2.0 * std::sin(t)});
    const LinearFit f = fit_linear_speed(traj, {0.0, 12.6});
    REQUIRE(f.r2 < 0.9);
}

TEST_CASE("circle fit recovers synthetic rotations", "[diagnostics]") {
    const Point center{0.3, -0.2};
    const double R = 2.0, omega = 0.5, phase0 = 0.4;
    Trajectory traj = make_traj(2);
    for (double t = 0.0; t <= 30.0 + 1e-12; t += 0.5)
        push_sample(traj, t,
                    {center[0] + R * std::cos(omega * t + phase0),
                     center[1] + R * std::sin(omega * t + phase0)});
    const CircleFit f = fit_circle(traj, {0.0, 30.0});
    REQUIRE_THAT(f.center[0], WithinAbs(center[0], 1e-8));
    REQUIRE_THAT(f.center[1], WithinAbs(center[1], 1e-8));
    REQUIRE_THAT(f.radius, WithinRel(R, 1e-8));
    REQUIRE_THAT(f.omega, WithinRel(omega, 1e-8));
    REQUIRE(f.r2 >= 1.0 - 1e-12);

    // Clockwise rotation has a negative angular velocity.
    Trajectory cw = make_traj(2);
    for (double t = 0.0; t <= 30.0 + 1e-12; t += 0.5)
        push_sample(cw, t, {R * std::cos(-omega * t), R * std::sin(-omega * t)});
    REQUIRE_THAT(fit_circle(cw, {0.0, 30.0}).omega, WithinRel(-omega, 1e-8));

    // Collinear samples are degenerate; short windows are rejected.
    Trajectory line = make_traj(2);
    for (double t = 0.0; t <= 30.0; t += 0.5) push_sample(line, t, {0.1 * t, 0.2 * t});
    REQUIRE_THROWS_AS(fit_circle(line, {0.0, 30.0}), numeric_error);
    REQUIRE_THROWS_AS(fit_circle(traj, {0.0, 5.0}), config_error);
    Trajectory one = make_traj(1);
    for (double t = 0.0; t <= 30.0; t += 0.5) push_sample(one, t, {0.1 * t, 0.0});
    REQUIRE_THROWS_AS(fit_circle(one, {0.0, 30.0}), config_error);
}

TEST_CASE("delay fit inverts the generating relation", "[diagnostics]") {
    ModelParams prm;
    prm.ell = 0.05;
    const double c = 0.2;
    const TimeWindow w{0.0, 10.0};
    for (double tau : {0.3, 1.0, 1.58114, 2.5}) {
        Trajectory traj = make_traj(2);
        for (double t = 0.0; t <= 10.0 + 1e-12; t += 0.25)
            push_sample(traj, t, {c * t, 0.0}, {c * (t - tau) - prm.ell, 0.0});
        REQUIRE_THAT(fit_delay(prm, traj, c, {1.0, 0.0}, w), WithinRel(tau, 1e-9));
    }

    Trajectory traj = make_traj(2);
    for (double t = 0.0; t <= 10.0 + 1e-12; t += 0.25) {
        // Pathogen extinct over the first half: those samples are skipped.
        if (t < 5.0)
            push_sample(traj, t, {c * t, 0.0});
        else
            push_sample(traj, t, {c * t, 0.0}, {c * (t - 1.5) - prm.ell, 0.0});
    }
    REQUIRE_THAT(fit_delay(prm, traj, c, {1.0, 0.0}, w), WithinRel(1.5, 1e-9));
    REQUIRE_THROWS_AS(fit_delay(prm, traj, c, {1.0, 0.0}, TimeWindow{0.0, 4.0}),
                      numeric_error);
    REQUIRE_THROWS_AS(fit_delay(prm, traj, 1e-7, {1.0, 0.0}, w), numeric_error);
}

TEST_CASE("ring score separates blobs from annuli", "[diagnostics]") {
    const Grid g(2, -6.0, 6.0, 129);
    REQUIRE(ring_score(g, gaussian_field(g, {0.0, 0.0}, 1.0)) < 0.01);
    REQUIRE(ring_score(g, annulus_field(g, 2.0)) > 0.95);
    REQUIRE_THROWS_AS(ring_score(g, Field(g.size(), 0.0)), degenerate_mass_error);

    // Mean radius of the annulus: R + width correction.
    REQUIRE_THAT(mean_radius(g, annulus_field(g, 2.0)), WithinRel(2.045, 0.01));
    REQUIRE(mean_radius(g, gaussian_field(g, {1.0, -2.0}, 0.5)) < 0.8);
}

TEST_CASE("profile constancy of a translating profile", "[diagnostics]") {
    const Grid g(2, -6.0, 6.0, 129);
    const double c = 0.31;
    std::vector<Snapshot> snaps;
    for (double t = 0.0; t <= 4.0 + 1e-12; t += 1.0)
        snaps.push_back({t, {0.0, 0.0}, gaussian_field(g, {-1.0 + c * t, 0.2}, 0.5), {}});
    const TimeWindow w{0.0, 4.0};

    REQUIRE(profile_constancy(g, snaps, c, {1.0, 0.0}, w) < 0.01);
    // The wrong speed leaves a large mismatch.
    REQUIRE(profile_constancy(g, snaps, 0.0, {1.0, 0.0}, w) > 0.1);

    // A comoving frame absorbs the motion into the offsets: identical window
    // fields with matching offsets compare with no shift at all.
    std::vector<Snapshot> comoving;
    for (double t = 0.0; t <= 4.0 + 1e-12; t += 1.0)
        comoving.push_back({t, {c * t, 0.0}, gaussian_field(g, {0.0, 0.2}, 0.5), {}});
    REQUIRE(profile_constancy(g, comoving, c, {1.0, 0.0}, w) < 1e-12);

    // Pure spreading is not a constant profile.
    std::vector<Snapshot> spreading;
    spreading.push_back({0.0, {0.0, 0.0}, gaussian_field(g, {0.0, 0.0}, 0.5), {}});
    spreading.push_back({1.0, {0.0, 0.0}, gaussian_field(g, {0.0, 0.0}, 0.8), {}});
    REQUIRE(profile_constancy(g, spreading, 0.0, {1.0, 0.0}, {0.0, 1.0}) > 0.1);

    REQUIRE_THROWS_AS(profile_constancy(g, snaps, c, {1.0, 0.0}, TimeWindow{3.5, 4.5}),
                      config_error);
}

TEST_CASE("classification of synthetic regimes", "[diagnostics]") {
    const ModelParams prm;  // ell = 0: the mean gap is exactly c tau
    const Grid g(2, -6.0, 6.0, 65);

    // Straight pulse with a translating Gaussian profile and delay 1.
    Trajectory linear{g, 0.1, {}, {}};
    const double c = 0.12, tau = 1.0;
    for (double t = 0.0; t <= 20.0 + 1e-12; t += 0.2)
        push_sample(linear, t, {0.05 + c * t, -0.3}, {0.05 + c * (t - tau), -0.3});
    for (double t = 0.0; t <= 20.0 + 1e-12; t += 4.0)
        linear.snapshots.push_back(
            {t, {0.0, 0.0}, gaussian_field(g, {0.05 + c * t, -0.3}, 0.5), {}});
    const PulseReport rl = classify(prm, linear);
    REQUIRE(rl.regime == Regime::linear_pulse);
    REQUIRE_THAT(rl.c_fit, WithinRel(c, 1e-9));
    REQUIRE_THAT(rl.delay_fit, WithinRel(tau, 1e-9));
    REQUIRE(rl.r2 >= 0.99);
    REQUIRE(rl.profile_residual < 0.05);

    // Deterministic: the same trajectory yields the same report bitwise.
    const PulseReport rl2 = classify(prm, linear);
    REQUIRE(rl.regime == rl2.regime);
    REQUIRE(rl.c_fit == rl2.c_fit);
    REQUIRE(rl.delay_fit == rl2.delay_fit);
    REQUIRE(rl.radius_fit == rl2.radius_fit);
    REQUIRE(rl.omega_fit == rl2.omega_fit);
    REQUIRE(rl.r2 == rl2.r2);
    REQUIRE(rl.profile_residual == rl2.profile_residual);
    REQUIRE(rl.ring_score_last == rl2.ring_score_last);

    // Rotating pulse: blob moving on a circle of constant radius.
    Trajectory rotating{g, 0.1, {}, {}};
    const double R = 2.0, omega = 0.3;
    for (double t = 0.0; t <= 20.0 + 1e-12; t += 0.2)
        push_sample(rotating, t, {R * std::cos(omega * t), R * std::sin(omega * t)});
    for (double t = 0.0; t <= 20.0 + 1e-12; t += 4.0)
        rotating.snapshots.push_back(
            {t, {0.0, 0.0},
             gaussian_field(g, {R * std::cos(omega * t), R * std::sin(omega * t)}, 0.5), {}});
    const PulseReport rr = classify(prm, rotating);
    REQUIRE(rr.regime == Regime::rotating_pulse);
    REQUIRE_THAT(rr.radius_fit, WithinRel(R, 1e-6));
    REQUIRE_THAT(rr.omega_fit, WithinRel(omega, 1e-6));
    REQUIRE(rr.r2 >= 0.99);

    // Spreading ring: stationary mean, annulus radius growing 36%.
    Trajectory ring{g, 0.1, {}, {}};
    for (double t = 0.0; t <= 20.0 + 1e-12; t += 0.2) push_sample(ring, t, {0.0, 0.0});
    for (double t = 0.0; t <= 20.0 + 1e-12; t += 4.0)
        ring.snapshots.push_back({t, {0.0, 0.0}, annulus_field(g, 1.0 + 0.1 * t), {}});
    const PulseReport rd = classify(prm, ring);
    REQUIRE(rd.regime == Regime::ring_diffusing);
    REQUIRE(rd.ring_score_last > 0.5);

    // Confined ring: same but with a frozen radius.
    Trajectory ring2{g, 0.1, {}, {}};
    for (double t = 0.0; t <= 20.0 + 1e-12; t += 0.2) push_sample(ring2, t, {0.0, 0.0});
    for (double t = 0.0; t <= 20.0 + 1e-12; t += 4.0)
        ring2.snapshots.push_back({t, {0.0, 0.0}, annulus_field(g, 2.0), {}});
    REQUIRE(classify(prm, ring2).regime == Regime::ring_stationary);

    // Expanding spiral with a non-translating profile: nothing fits (the
    // radius drifts 25% between the window halves).
    Trajectory spiral{g, 0.1, {}, {}};
    for (double t = 0.0; t <= 20.0 + 1e-12; t += 0.2)
        push_sample(spiral, t, {0.1 * t * std::cos(0.8 * t), 0.1 * t * std::sin(0.8 * t)});
    for (double t = 0.0; t <= 20.0 + 1e-12; t += 4.0)
        spiral.snapshots.push_back({t, {0.0, 0.0}, gaussian_field(g, {0.0, 0.0}, 0.5), {}});
    REQUIRE(classify(prm, spiral).regime == Regime::undetermined);
}
