#pragma once
/// @file quadrature.hpp
/// Reference quadratures used as independent oracles: trapezoid rule with
/// interval doubling (spectrally accurate for smooth integrands that decay
/// inside the interval) and Gauss–Hermite rules (exact for polynomial
/// integrands against the e^{-x^2} weight).

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "redqueen/errors.hpp"

namespace redqueen {

/// Trapezoid rule on [a, b] with successive halving of the step until two
/// consecutive refinements agree to `tol` (relative to max(1,|I|)).
/// For analytic integrands whose tails are negligible at a and b this
/// converges geometrically, which makes it a good independent oracle.
template <class F>
double integrate_trapezoid(F&& f, double a, double b, double tol = 1e-13,
                           int max_doublings = 24) {
    if (!(b > a)) throw config_error("integrate_trapezoid: requires b > a");
    double h = b - a;
    double t = 0.5 * h * (f(a) + f(b));
    std::size_t intervals = 1;
    int stable = 0;
    for (int level = 0; level < max_doublings; ++level) {
        double mid_sum = 0.0;
        for (std::size_t i = 0; i < intervals; ++i)
            mid_sum += f(a + h * (static_cast<double>(i) + 0.5));
        const double t_new = 0.5 * t + 0.5 * h * mid_sum;
        h *= 0.5;
        intervals *= 2;
        const double delta = std::fabs(t_new - t);
        t = t_new;
        if (level >= 2 && delta <= tol * std::max(1.0, std::fabs(t))) {
            if (++stable >= 2) return t;
        } else {
            stable = 0;
        }
    }
    return t;
}

/// Product trapezoid rule on [ax,bx] x [ay,by] with the same doubling
/// strategy applied to both axes simultaneously.
template <class F>
double integrate_trapezoid_2d(F&& f, double ax, double bx, double ay, double by,
                              double tol = 1e-12, int max_doublings = 14) {
    auto row = [&](double y, std::size_t nx) {
        const double hx = (bx - ax) / static_cast<double>(nx);
        double s = 0.5 * (f(ax, y) + f(bx, y));
        for (std::size_t i = 1; i < nx; ++i) s += f(ax + hx * static_cast<double>(i), y);
        return s * hx;
    };
    double t_prev = 0.0;
    int stable = 0;
    for (int level = 4; level < max_doublings; ++level) {
        const std::size_t n = std::size_t{1} << level;
        const double hy = (by - ay) / static_cast<double>(n);
        double s = 0.5 * (row(ay, n) + row(by, n));
        for (std::size_t j = 1; j < n; ++j) s += row(ay + hy * static_cast<double>(j), n);
        s *= hy;
        const double delta = std::fabs(s - t_prev);
        if (level > 4 && delta <= tol * std::max(1.0, std::fabs(s))) {
            if (++stable >= 1) return s;
        } else {
            stable = 0;
        }
        t_prev = s;
    }
    return t_prev;
}

/// Gauss–Hermite rule: nodes/weights for \int e^{-x^2} f(x) dx with m nodes.
/// Nodes are the roots of the degree-m Hermite polynomial, found by Newton
/// iteration on the orthonormal-recurrence evaluation (stable to m ~ 300).
struct GaussHermiteRule {
    std::vector<double> node;
    std::vector<double> weight;
};

inline GaussHermiteRule gauss_hermite_rule(int m) {
    if (m < 1) throw config_error("gauss_hermite_rule: need at least one node");
    GaussHermiteRule rule;
    rule.node.resize(m);
    rule.weight.resize(m);
    const double pi_quarter = std::pow(M_PI, -0.25);
    // Evaluate orthonormal Hermite functions h_k(x) = H_k(x) e^{-x^2/2} / sqrt(2^k k! sqrt(pi))
    // and return (h_m, h_{m-1}).
    auto eval = [&](double x) {
        double hm1 = 0.0;                          // h_{-1}
        double h = pi_quarter * std::exp(-0.5 * x * x); // h_0
        for (int k = 0; k < m; ++k) {
            const double hnext = x * std::sqrt(2.0 / (k + 1.0)) * h -
                                 std::sqrt(static_cast<double>(k) / (k + 1.0)) * hm1;
            hm1 = h;
            h = hnext;
        }
        return std::pair<double, double>{h, hm1}; // (h_m, h_{m-1})
    };
    // Initial guesses: Airy-type estimate for the largest root, spacing walk inward.
    for (int i = 0; i < (m + 1) / 2; ++i) {
        double x;
        if (i == 0) {
            x = std::sqrt(2.0 * m + 1.0) - 1.85575 * std::pow(2.0 * m + 1.0, -1.0 / 6.0);
        } else {
            x = rule.node[m - i]; // previous (larger) root
            x -= (i == 1 ? 1.14 * std::pow(m, 0.426) / x
                         : (rule.node[m - i + 1] - rule.node[m - i]) * 1.0);
            if (i >= 2) x = 2.0 * rule.node[m - i] - rule.node[m - i + 1];
        }
        for (int it = 0; it < 100; ++it) {
            const auto [hm, hm1] = eval(x);
            // h_m'(x) = sqrt(2m) h_{m-1}(x) - x h_m(x)
            const double dh = std::sqrt(2.0 * m) * hm1 - x * hm;
            const double dx = hm / dh;
            x -= dx;
            if (std::fabs(dx) < 1e-15 * std::max(1.0, std::fabs(x))) break;
        }
        const auto [hm, hm1] = eval(x);
        (void)hm;
        // Classic weight 2^{m-1} m! sqrt(pi) / (m H_{m-1}(x))^2 rewritten with
        // the orthonormal Hermite function h_{m-1}: w = e^{-x^2}/(m h_{m-1}(x)^2).
        const double w = std::exp(-x * x) / (m * hm1 * hm1);
        rule.node[m - 1 - i] = x;
        rule.node[i] = -x;
        rule.weight[m - 1 - i] = w;
        rule.weight[i] = w;
    }
    if (m % 2 == 1) {
        rule.node[m / 2] = 0.0;
        const auto [hm, hm1] = eval(0.0);
        (void)hm;
        rule.weight[m / 2] = 1.0 / (m * hm1 * hm1);
    }
    return rule;
}

/// \int_R e^{-x^2} f(x) dx by Gauss–Hermite with m nodes (weights already
/// contain the e^{-x^2} factor, so pass the bare f).
template <class F>
double integrate_gauss_hermite(F&& f, int m) {
    const GaussHermiteRule rule = gauss_hermite_rule(m);
    double s = 0.0;
    for (int i = 0; i < m; ++i) s += rule.weight[i] * f(rule.node[i]);
    return s;
}

} // namespace redqueen
