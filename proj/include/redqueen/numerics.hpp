#pragma once
/// @file numerics.hpp
/// Small numeric building blocks: deterministic reductions, log-domain
/// combinatorics, exact big-integer binomial comparison, and a generic
/// classical RK4 step shared by the ODE and PDE integrators.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "redqueen/errors.hpp"

namespace redqueen {

// ======================= deterministic reductions =======================

/// Pairwise summation of f(i), i in [begin, end).  The reduction tree depends
/// only on the index range, so results are bitwise reproducible run-to-run.
template <class F>
double pairwise_sum(std::size_t begin, std::size_t end, F&& f) {
    const std::size_t n = end - begin;
    if (n <= 32) {
        double s = 0.0;
        for (std::size_t i = begin; i < end; ++i) s += f(i);
        return s;
    }
    const std::size_t mid = begin + n / 2;
    return pairwise_sum(begin, mid, f) + pairwise_sum(mid, end, f);
}

inline double pairwise_sum(const std::vector<double>& v) {
    return pairwise_sum(std::size_t{0}, v.size(), [&](std::size_t i) { return v[i]; });
}

/// Kahan compensated accumulator for long series with cancellation.
struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;
    void add(double x) {
        const double y = x - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    double value() const { return sum; }
};

// ========================= log-domain factorials ========================

namespace detail {
inline const std::vector<double>& log_factorial_table() {
    static const std::vector<double> table = [] {
        std::vector<double> t(20001);
        t[0] = 0.0;
        for (std::size_t k = 1; k < t.size(); ++k)
            t[k] = std::lgamma(static_cast<double>(k) + 1.0);
        return t;
    }();
    return table;
}
} // namespace detail

/// log(k!) with a precomputed table (exact lgamma beyond the table).
inline double log_factorial(std::uint64_t k) {
    const auto& t = detail::log_factorial_table();
    if (k < t.size()) return t[k];
    return std::lgamma(static_cast<double>(k) + 1.0);
}

/// log of the binomial coefficient C(n, k); requires k <= n.
inline double log_binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) throw config_error("log_binomial: k > n");
    return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

// ================ exact binomial comparison (128/256 bit) ===============

/// C(n, k) in 128-bit integer arithmetic; throws numeric_error on overflow.
/// Every intermediate product/quotient in the classic running-product scheme
/// is exact, so the result is the exact integer whenever it fits.
inline unsigned __int128 binomial_u128(unsigned n, unsigned k) {
    if (k > n) return 0;
    if (k > n - k) k = n - k;
    unsigned __int128 b = 1;
    const unsigned __int128 maxv = ~static_cast<unsigned __int128>(0);
    for (unsigned i = 1; i <= k; ++i) {
        const unsigned __int128 factor = n - k + i;
        if (b > maxv / factor) throw numeric_error("binomial_u128: overflow");
        b = b * factor / i;
    }
    return b;
}

namespace detail {
/// 256-bit unsigned product of two 128-bit values (schoolbook on 64-bit limbs).
struct U256 {
    std::uint64_t w[4] = {0, 0, 0, 0}; // little-endian limbs
};

inline U256 mul_128_128(unsigned __int128 a, unsigned __int128 b) {
    const std::uint64_t a0 = static_cast<std::uint64_t>(a), a1 = static_cast<std::uint64_t>(a >> 64);
    const std::uint64_t b0 = static_cast<std::uint64_t>(b), b1 = static_cast<std::uint64_t>(b >> 64);
    U256 r;
    auto add_at = [&r](int pos, unsigned __int128 v) {
        for (int i = pos; i < 4 && v != 0; ++i) {
            const unsigned __int128 s = static_cast<unsigned __int128>(r.w[i]) + (v & ~std::uint64_t{0});
            r.w[i] = static_cast<std::uint64_t>(s);
            v = (v >> 64) + (s >> 64);
        }
    };
    add_at(0, static_cast<unsigned __int128>(a0) * b0);
    add_at(1, static_cast<unsigned __int128>(a0) * b1);
    add_at(1, static_cast<unsigned __int128>(a1) * b0);
    add_at(2, static_cast<unsigned __int128>(a1) * b1);
    return r;
}

inline int compare_u256(const U256& x, const U256& y) {
    for (int i = 3; i >= 0; --i) {
        if (x.w[i] < y.w[i]) return -1;
        if (x.w[i] > y.w[i]) return 1;
    }
    return 0;
}
} // namespace detail

/// Exact comparison of a*b vs c*d for 128-bit unsigned operands.
/// Returns -1, 0, or +1.
inline int compare_products_exact(unsigned __int128 a, unsigned __int128 b,
                                  unsigned __int128 c, unsigned __int128 d) {
    return detail::compare_u256(detail::mul_128_128(a, b), detail::mul_128_128(c, d));
}

// ============================ classical RK4 =============================

/// Scratch buffers for rk4_step, reusable across steps to avoid churn.
struct Rk4Workspace {
    std::vector<double> k1, k2, k3, k4, tmp;
    void resize(std::size_t n) {
        k1.resize(n); k2.resize(n); k3.resize(n); k4.resize(n); tmp.resize(n);
    }
};

/// One classical Runge–Kutta 4 step for y' = rhs(y).  The right-hand side is
/// re-evaluated from scratch at every substage, so any state-dependent
/// quantities inside rhs (masses, means) are recomputed per substage.
template <class Rhs>
void rk4_step(std::vector<double>& y, double dt, Rhs&& rhs, Rk4Workspace& ws) {
    const std::size_t n = y.size();
    ws.resize(n);
    rhs(y, ws.k1);
    for (std::size_t i = 0; i < n; ++i) ws.tmp[i] = y[i] + 0.5 * dt * ws.k1[i];
    rhs(ws.tmp, ws.k2);
    for (std::size_t i = 0; i < n; ++i) ws.tmp[i] = y[i] + 0.5 * dt * ws.k2[i];
    rhs(ws.tmp, ws.k3);
    for (std::size_t i = 0; i < n; ++i) ws.tmp[i] = y[i] + dt * ws.k3[i];
    rhs(ws.tmp, ws.k4);
    for (std::size_t i = 0; i < n; ++i)
        y[i] += dt / 6.0 * (ws.k1[i] + 2.0 * ws.k2[i] + 2.0 * ws.k3[i] + ws.k4[i]);
}

} // namespace redqueen
