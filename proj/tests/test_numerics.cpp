/// Unit tests for the numeric building blocks and the reference quadratures.
/// The quadratures are the independent oracles used throughout the suite, so
/// they are themselves checked against closed-form integrals here.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "redqueen/numerics.hpp"
#include "redqueen/quadrature.hpp"

using namespace redqueen;

namespace {
constexpr double kSqrtPi = 1.7724538509055159;
}

TEST_CASE("pairwise summation is deterministic and accurate", "[numerics]") {
    std::mt19937 rng(12345);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> v(100000);
    for (auto& x : v) x = dist(rng);

    const double s1 = pairwise_sum(v);
    const double s2 = pairwise_sum(v);
    REQUIRE(s1 == s2); // bitwise reproducible

    // Against compensated summation as reference.
    KahanSum ref;
    for (double x : v) ref.add(x);
    REQUIRE(std::fabs(s1 - ref.value()) < 1e-10);

    // Index-function form.
    const double s3 = pairwise_sum(std::size_t{0}, v.size(), [&](std::size_t i) { return v[i]; });
    REQUIRE(s3 == s1);
}

TEST_CASE("log factorial and log binomial", "[numerics]") {
    REQUIRE(log_factorial(0) == 0.0);
    REQUIRE(log_factorial(1) == 0.0);
    REQUIRE_THAT(log_factorial(5), Catch::Matchers::WithinRel(std::log(120.0), 1e-14));
    REQUIRE_THAT(log_factorial(170), Catch::Matchers::WithinRel(std::lgamma(171.0), 1e-14));
    REQUIRE_THAT(log_binomial(5, 2), Catch::Matchers::WithinRel(std::log(10.0), 1e-13));
    REQUIRE_THAT(log_binomial(60, 30), Catch::Matchers::WithinRel(std::log(118264581564861424.0), 1e-12));
    REQUIRE_THROWS_AS(log_binomial(3, 5), config_error);
}

TEST_CASE("exact 128-bit binomials and 256-bit product comparison", "[numerics]") {
    REQUIRE(binomial_u128(0, 0) == 1);
    REQUIRE(binomial_u128(6, 3) == 20);
    // C(60,30), frozen from an independent big-integer computation.
    REQUIRE(binomial_u128(60, 30) == static_cast<unsigned __int128>(118264581564861424ULL));
    // C(120,60) exceeds 64 bits but fits 128; check both 64-bit halves
    // against an independent big-integer computation.
    const unsigned __int128 c120 = binomial_u128(120, 60);
    REQUIRE(static_cast<std::uint64_t>(c120 >> 64) == 5237504702960544ULL);
    REQUIRE(static_cast<std::uint64_t>(c120) == 2093244173541933552ULL);

    // Log-concavity of a binomial row: C(60,30)^2 > C(60,29) * C(60,31).
    const auto a = binomial_u128(60, 29), b = binomial_u128(60, 31), c = binomial_u128(60, 30);
    REQUIRE(compare_products_exact(c, c, a, b) == 1);
    REQUIRE(compare_products_exact(a, b, c, c) == -1);
    REQUIRE(compare_products_exact(a, b, b, a) == 0);
}

TEST_CASE("RK4 step has fourth-order local behavior", "[numerics]") {
    // y' = y, one step from 1: exact e^dt; RK4 error ~ dt^5/120.
    auto rhs = [](const std::vector<double>& y, std::vector<double>& dy) { dy[0] = y[0]; };
    Rk4Workspace ws;
    auto err = [&](double dt) {
        std::vector<double> y = {1.0};
        rk4_step(y, dt, rhs, ws);
        return std::fabs(y[0] - std::exp(dt));
    };
    const double r = err(0.2) / err(0.1);
    REQUIRE(r > 24.0); // ~2^5 = 32 expected for a 5th-order local error
    REQUIRE(r < 40.0);
}

TEST_CASE("Gauss-Hermite rule matches Gaussian moments exactly", "[numerics]") {
    // Degree-<2m-1 polynomial integrands are exact.
    REQUIRE_THAT(integrate_gauss_hermite([](double) { return 1.0; }, 5),
                 Catch::Matchers::WithinRel(kSqrtPi, 1e-14));
    REQUIRE_THAT(integrate_gauss_hermite([](double x) { return x * x; }, 5),
                 Catch::Matchers::WithinRel(0.5 * kSqrtPi, 1e-14));
    REQUIRE_THAT(integrate_gauss_hermite([](double x) { return x * x * x * x; }, 5),
                 Catch::Matchers::WithinRel(0.75 * kSqrtPi, 1e-13));
    // Odd moments vanish by node symmetry.
    REQUIRE(std::fabs(integrate_gauss_hermite([](double x) { return x * x * x; }, 6)) < 1e-15);
    // Non-polynomial analytic integrand: int e^{-x^2} cos x = sqrt(pi) e^{-1/4}.
    REQUIRE_THAT(integrate_gauss_hermite([](double x) { return std::cos(x); }, 40),
                 Catch::Matchers::WithinRel(1.380388447043143, 1e-13));
    // Large rule stays stable.
    REQUIRE_THAT(integrate_gauss_hermite([](double) { return 1.0; }, 200),
                 Catch::Matchers::WithinRel(kSqrtPi, 1e-12));
}

TEST_CASE("trapezoid refinement is spectrally accurate on decaying integrands", "[numerics]") {
    const double g = integrate_trapezoid([](double x) { return std::exp(-x * x); }, -10.0, 10.0);
    REQUIRE_THAT(g, Catch::Matchers::WithinRel(kSqrtPi, 1e-13));

    const double gc = integrate_trapezoid([](double x) { return std::exp(-x * x) * std::cos(x); },
                                          -10.0, 10.0);
    REQUIRE_THAT(gc, Catch::Matchers::WithinRel(1.380388447043143, 1e-13));

    const double g2 = integrate_trapezoid_2d(
        [](double x, double y) { return std::exp(-(x * x + y * y)); }, -8.0, 8.0, -8.0, 8.0);
    REQUIRE_THAT(g2, Catch::Matchers::WithinRel(M_PI, 1e-11));

    REQUIRE_THROWS_AS(integrate_trapezoid([](double) { return 0.0; }, 1.0, -1.0), config_error);
}
