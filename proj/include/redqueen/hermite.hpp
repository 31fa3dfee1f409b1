#pragma once
/// @file hermite.hpp
/// Harmonic-oscillator eigenbasis of H = -mu_H^2 lap + beta^2 |z|^2 on R^n:
/// eigenfunctions Gamma_k (products of Hermite polynomials against a
/// Gaussian), their eigenvalues, zeroth/first moments, overlaps with
/// Gaussians, the product integral of two Hermite polynomials against a
/// shifted Gaussian weight, the scale-shift expansion identity, and the
/// derivative ladder relation.  Everything closed-form here is used as the
/// analytic oracle layer by the rest of the library.
///
/// Numerical conventions: physicists' Hermite polynomials H_k (H0=1, H1=2x);
/// the normalized function hhat_k(x) = H_k(x) e^{-x^2/2} / sqrt(2^k k!) is
/// evaluated by a scaled recurrence that never overflows, and all factorial
/// prefactors are assembled in log domain with sign tracking.

#include <array>
#include <cmath>
#include <limits>
#include <tuple>
#include <utility>
#include <vector>

#include "redqueen/errors.hpp"
#include "redqueen/model.hpp"
#include "redqueen/numerics.hpp"

namespace redqueen {

// ============================ multi-indices =============================

/// Multi-index in dimension n <= 2; unused components stay 0.
struct MultiIndex {
    std::array<int, 2> k{0, 0};
    int n = 2;

    MultiIndex() = default;
    MultiIndex(int k0, int n_) : k{k0, 0}, n(n_) {}
    MultiIndex(int k0, int k1, int n_) : k{k0, k1}, n(n_) {}

    int sigma() const { return k[0] + (n == 2 ? k[1] : 0); }
    int operator[](int i) const { return k[i]; }
    bool operator==(const MultiIndex& o) const { return n == o.n && k == o.k; }
    bool operator<(const MultiIndex& o) const {
        return std::tie(n, k[0], k[1]) < std::tie(o.n, o.k[0], o.k[1]);
    }

    MultiIndex raised(int axis) const {
        MultiIndex r = *this;
        ++r.k[axis];
        return r;
    }
    MultiIndex lowered(int axis) const {
        MultiIndex r = *this;
        --r.k[axis];
        return r;
    }
};

/// All multi-indices with sigma(k) <= sigma_max, ordered by (sigma, k1).
inline std::vector<MultiIndex> multi_indices_up_to(int n, int sigma_max) {
    if (n != 1 && n != 2) throw config_error("multi_indices_up_to: n must be 1 or 2");
    std::vector<MultiIndex> out;
    for (int s = 0; s <= sigma_max; ++s) {
        if (n == 1) {
            out.emplace_back(s, 1);
        } else {
            for (int k1 = s; k1 >= 0; --k1) out.emplace_back(k1, s - k1, 2);
        }
    }
    return out;
}

/// Spectral parameters of the oscillator.
struct HermiteContext {
    double mu_H = 1.0;
    double beta = 1.0;
    int n = 2;

    HermiteContext() = default;
    HermiteContext(double mu, double b, int dim) : mu_H(mu), beta(b), n(dim) {
        if (!(mu_H > 0.0)) throw config_error("HermiteContext: mu_H must be > 0");
        if (!(beta > 0.0)) throw config_error("HermiteContext: beta must be > 0");
        if (n != 1 && n != 2) throw config_error("HermiteContext: n must be 1 or 2");
    }
};

// ======================== 1-D Hermite evaluation ========================

/// Physicists' Hermite polynomial H_k(x) by forward recurrence.
inline double hermite(int k, double x) {
    if (k < 0) throw config_error("hermite: k must be >= 0");
    double hm1 = 0.0, h = 1.0; // H_{-1}, H_0
    for (int j = 0; j < k; ++j) {
        const double hn = 2.0 * x * h - 2.0 * static_cast<double>(j) * hm1;
        hm1 = h;
        h = hn;
    }
    return h;
}

/// Fills out[0..kmax] with hhat_m(x) = H_m(x) e^{-x^2/2} / sqrt(2^m m!).
/// The scaled recurrence hhat_{m+1} = x sqrt(2/(m+1)) hhat_m
///                                    - sqrt(m/(m+1)) hhat_{m-1}
/// keeps every value in [-1, 1] (the classical Cramer bound), so this is
/// stable to arbitrary order.
inline void hermite_normalized_ladder(int kmax, double x, std::vector<double>& out) {
    if (kmax < 0) throw config_error("hermite_normalized_ladder: kmax must be >= 0");
    out.resize(static_cast<std::size_t>(kmax) + 1);
    double hm1 = 0.0, h = std::exp(-0.5 * x * x);
    out[0] = h;
    for (int m = 0; m < kmax; ++m) {
        const double hn = x * std::sqrt(2.0 / (m + 1.0)) * h -
                          std::sqrt(static_cast<double>(m) / (m + 1.0)) * hm1;
        hm1 = h;
        h = hn;
        out[static_cast<std::size_t>(m) + 1] = h;
    }
}

/// hhat_k(x) = H_k(x) e^{-x^2/2} / sqrt(2^k k!).
inline double hermite_normalized(int k, double x) {
    if (k < 0) throw config_error("hermite_normalized: k must be >= 0");
    double hm1 = 0.0, h = std::exp(-0.5 * x * x);
    for (int m = 0; m < k; ++m) {
        const double hn = x * std::sqrt(2.0 / (m + 1.0)) * h -
                          std::sqrt(static_cast<double>(m) / (m + 1.0)) * hm1;
        hm1 = h;
        h = hn;
    }
    return h;
}

// ========================= eigenbasis Gamma_k ===========================

/// log of the normalization constant C_k = (beta/(pi mu_H))^{n/4}
/// (2^{sigma} prod k_i!)^{-1/2}.
inline double log_norm_constant(const HermiteContext& ctx, const MultiIndex& k) {
    double lf = 0.0;
    for (int i = 0; i < ctx.n; ++i) lf += log_factorial(static_cast<std::uint64_t>(k[i]));
    return 0.25 * ctx.n * std::log(ctx.beta / (M_PI * ctx.mu_H)) -
           0.5 * (k.sigma() * std::log(2.0) + lf);
}

/// Gamma_k(z) = C_k e^{-beta|z|^2/(2 mu_H)} prod_i H_{k_i}(sqrt(beta/mu_H) z_i).
/// Evaluated as (beta/(pi mu_H))^{n/4} prod_i hhat_{k_i}(sqrt(beta/mu_H) z_i),
/// which is overflow-free for any order.
inline double gamma_k(const HermiteContext& ctx, const MultiIndex& k, const Point& z) {
    const double s = std::sqrt(ctx.beta / ctx.mu_H);
    double v = std::pow(ctx.beta / (M_PI * ctx.mu_H), 0.25 * ctx.n);
    for (int i = 0; i < ctx.n; ++i) v *= hermite_normalized(k[i], s * z[i]);
    return v;
}

/// Eigenvalue of -mu_H^2 lap + beta^2 |z|^2 on Gamma_k: (2 sigma(k) + n) mu_H beta.
inline double eigenvalue(const HermiteContext& ctx, const MultiIndex& k) {
    return (2.0 * k.sigma() + ctx.n) * ctx.mu_H * ctx.beta;
}

/// Zeroth moment m_k = int Gamma_k: zero unless every k_i is even, otherwise
/// (pi mu_H/beta)^{n/4} 2^{(n-sigma)/2} prod_i sqrt(k_i!)/(k_i/2)!.
inline double moment_mk(const HermiteContext& ctx, const MultiIndex& k) {
    double logv = 0.25 * ctx.n * std::log(M_PI * ctx.mu_H / ctx.beta) +
                  0.5 * (ctx.n - k.sigma()) * std::log(2.0);
    for (int i = 0; i < ctx.n; ++i) {
        if (k[i] % 2 != 0) return 0.0;
        logv += 0.5 * log_factorial(static_cast<std::uint64_t>(k[i])) -
                log_factorial(static_cast<std::uint64_t>(k[i] / 2));
    }
    return std::exp(logv);
}

/// First moment w_{i,k} = int z_i Gamma_k: zero unless k_i is odd and every
/// other component even, otherwise
/// 2 sqrt(mu_H/beta) (pi mu_H/beta)^{n/4} 2^{(n-sigma)/2}
///   sqrt(k_i!)/((k_i-1)/2)! prod_{j!=i} sqrt(k_j!)/(k_j/2)!.
inline double first_moment_wik(const HermiteContext& ctx, int axis, const MultiIndex& k) {
    if (axis < 0 || axis >= ctx.n) throw config_error("first_moment_wik: axis out of range");
    if (k[axis] % 2 != 1) return 0.0;
    double logv = std::log(2.0) + 0.5 * std::log(ctx.mu_H / ctx.beta) +
                  0.25 * ctx.n * std::log(M_PI * ctx.mu_H / ctx.beta) +
                  0.5 * (ctx.n - k.sigma()) * std::log(2.0);
    for (int i = 0; i < ctx.n; ++i) {
        if (i == axis) {
            logv += 0.5 * log_factorial(static_cast<std::uint64_t>(k[i])) -
                    log_factorial(static_cast<std::uint64_t>((k[i] - 1) / 2));
        } else {
            if (k[i] % 2 != 0) return 0.0;
            logv += 0.5 * log_factorial(static_cast<std::uint64_t>(k[i])) -
                    log_factorial(static_cast<std::uint64_t>(k[i] / 2));
        }
    }
    return std::exp(logv);
}

/// int z_i Gamma_k e^{-beta|z|^2/(2 mu_H)} dz: nonzero only for k = e_i
/// (k_i = 1, all other components 0), with value
/// sqrt(mu_H/(2 beta)) (mu_H pi / beta)^{n/4}.
inline double gaussian_overlap_first(const HermiteContext& ctx, int axis, const MultiIndex& k) {
    if (axis < 0 || axis >= ctx.n) throw config_error("gaussian_overlap_first: axis out of range");
    for (int i = 0; i < ctx.n; ++i) {
        if (i == axis && k[i] != 1) return 0.0;
        if (i != axis && k[i] != 0) return 0.0;
    }
    return std::sqrt(ctx.mu_H / (2.0 * ctx.beta)) *
           std::pow(ctx.mu_H * M_PI / ctx.beta, 0.25 * ctx.n);
}

/// int Gamma_{2k} e^{-theta|z|^2} dz for the even index 2k (the argument is
/// the half index k):
/// C_{2k} (2 pi mu_H/(beta+2 theta mu_H))^{n/2}
///   prod_i ((beta-2 theta mu_H)/(beta+2 theta mu_H))^{k_i} (2k_i)!/k_i!.
inline double gaussian_overlap_even(const HermiteContext& ctx, const MultiIndex& half_k,
                                    double theta) {
    if (!(theta > 0.0)) throw config_error("gaussian_overlap_even: theta must be > 0");
    MultiIndex full = half_k;
    for (int i = 0; i < ctx.n; ++i) full.k[i] = 2 * half_k[i];
    const double denom = ctx.beta + 2.0 * theta * ctx.mu_H;
    const double base = (ctx.beta - 2.0 * theta * ctx.mu_H) / denom;
    double logv = log_norm_constant(ctx, full) +
                  0.5 * ctx.n * std::log(2.0 * M_PI * ctx.mu_H / denom);
    double sign = 1.0;
    for (int i = 0; i < ctx.n; ++i) {
        const int ki = half_k[i];
        if (ki > 0) {
            if (base == 0.0) return 0.0;
            logv += ki * std::log(std::fabs(base));
            if (base < 0.0 && ki % 2 == 1) sign = -sign;
        }
        logv += log_factorial(static_cast<std::uint64_t>(2 * ki)) -
                log_factorial(static_cast<std::uint64_t>(ki));
    }
    return sign * std::exp(logv);
}

// ========== product of two Hermite polynomials, shifted Gaussian =========

namespace detail {
/// Core of int H_j H_k e^{-y^2 - theta (y-kappa)^2} dy, j >= k assumed:
/// prefactor sqrt(pi/(1+theta)) lambda^{j+k} e^{-theta kappa^2/(1+theta)},
/// lambda = sqrt(theta/(1+theta)), times
/// sum_{l=0}^{k} j! k! / (l! (j-l)! (k-l)!) (2/theta)^l
///              H_{j-l}(lambda kappa) H_{k-l}(lambda kappa).
/// Returns {log |integral|, sign}; sign = 0 means the integral is exactly 0.
inline std::pair<double, double> hermite_gauss_log(int j, int k, double theta, double kappa) {
    const double lambda = std::sqrt(theta / (1.0 + theta));
    const double y0 = lambda * kappa;
    std::vector<double> hh;
    hermite_normalized_ladder(j, y0, hh);
    // log |H_m(y0)| and sign, recovered from the normalized ladder.
    auto logH = [&](int m) {
        const double a = hh[static_cast<std::size_t>(m)];
        const double lg = (a == 0.0)
            ? -std::numeric_limits<double>::infinity()
            : std::log(std::fabs(a)) + 0.5 * y0 * y0 +
                  0.5 * (m * std::log(2.0) + log_factorial(static_cast<std::uint64_t>(m)));
        return std::pair<double, double>{lg, a == 0.0 ? 0.0 : (a > 0.0 ? 1.0 : -1.0)};
    };
    const double log2theta = std::log(2.0 / theta);
    std::vector<double> logt(static_cast<std::size_t>(k) + 1);
    std::vector<double> sgn(static_cast<std::size_t>(k) + 1);
    double logmax = -std::numeric_limits<double>::infinity();
    for (int l = 0; l <= k; ++l) {
        const auto [lj, sj] = logH(j - l);
        const auto [lk, sk] = logH(k - l);
        const double lt = log_factorial(static_cast<std::uint64_t>(j)) +
                          log_factorial(static_cast<std::uint64_t>(k)) -
                          log_factorial(static_cast<std::uint64_t>(l)) -
                          log_factorial(static_cast<std::uint64_t>(j - l)) -
                          log_factorial(static_cast<std::uint64_t>(k - l)) +
                          l * log2theta + lj + lk;
        logt[static_cast<std::size_t>(l)] = lt;
        sgn[static_cast<std::size_t>(l)] = sj * sk;
        if (sj * sk != 0.0 && lt > logmax) logmax = lt;
    }
    if (!std::isfinite(logmax)) return {-std::numeric_limits<double>::infinity(), 0.0};
    KahanSum s;
    for (int l = 0; l <= k; ++l) {
        const std::size_t i = static_cast<std::size_t>(l);
        if (sgn[i] != 0.0) s.add(sgn[i] * std::exp(logt[i] - logmax));
    }
    const double total = s.value();
    if (total == 0.0) return {-std::numeric_limits<double>::infinity(), 0.0};
    const double logv = 0.5 * std::log(M_PI / (1.0 + theta)) +
                        (j + k) * std::log(lambda) -
                        theta * kappa * kappa / (1.0 + theta) +
                        logmax + std::log(std::fabs(total));
    return {logv, total > 0.0 ? 1.0 : -1.0};
}
} // namespace detail

/// int H_j H_k e^{-y^2 - theta (y-kappa)^2} dy (raw value; overflows for
/// j + k beyond ~300 — use the scaled variant in asymptotic work).
inline double hermite_gauss_product(int j, int k, double theta, double kappa) {
    if (j < 0 || k < 0) throw config_error("hermite_gauss_product: indices must be >= 0");
    if (!(theta > 0.0)) throw config_error("hermite_gauss_product: theta must be > 0");
    if (j < k) std::swap(j, k);
    const auto [logv, sign] = detail::hermite_gauss_log(j, k, theta, kappa);
    return sign == 0.0 ? 0.0 : sign * std::exp(logv);
}

/// Same integral divided by sqrt(2^{j+k} j! k!); bounded by sqrt(pi/theta)
/// for all orders, safe at any j, k.
inline double hermite_gauss_product_scaled(int j, int k, double theta, double kappa) {
    if (j < 0 || k < 0) throw config_error("hermite_gauss_product_scaled: indices must be >= 0");
    if (!(theta > 0.0)) throw config_error("hermite_gauss_product_scaled: theta must be > 0");
    if (j < k) std::swap(j, k);
    const auto [logv, sign] = detail::hermite_gauss_log(j, k, theta, kappa);
    if (sign == 0.0) return 0.0;
    const double logscale = 0.5 * ((j + k) * std::log(2.0) +
                                   log_factorial(static_cast<std::uint64_t>(j)) +
                                   log_factorial(static_cast<std::uint64_t>(k)));
    return sign * std::exp(logv - logscale);
}

// ===================== scale-shift expansion identity ====================

/// Evaluates the expansion
/// sum_j binom(k,j) gamma^j (1-gamma^2)^{(k-j)/2}
///       H_{k-j}(y gamma / sqrt(1-gamma^2)) H_j(x),
/// which must equal H_k(gamma (x + y)) for 0 < gamma < 1.
inline double hermite_scale_shift(int k, double gamma, double x, double y) {
    if (k < 0) throw config_error("hermite_scale_shift: k must be >= 0");
    if (!(gamma > 0.0 && gamma < 1.0))
        throw config_error("hermite_scale_shift: gamma must lie in (0,1)");
    const double root = std::sqrt(1.0 - gamma * gamma);
    const double arg = y * gamma / root;
    KahanSum s;
    for (int j = 0; j <= k; ++j) {
        const double term = std::exp(log_binomial(k, j) + j * std::log(gamma) +
                                     0.5 * (k - j) * std::log1p(-gamma * gamma));
        s.add(term * hermite(k - j, arg) * hermite(j, x));
    }
    return s.value();
}

// ========================= derivative ladder ============================

/// d/dz_i Gamma_k(z) = sqrt(beta/mu_H) ( sqrt(k_i/2) Gamma_{k - e_i}
///                                     - sqrt((k_i+1)/2) Gamma_{k + e_i} );
/// the lowered term is dropped when k_i = 0.
inline double gamma_k_derivative(const HermiteContext& ctx, int axis, const MultiIndex& k,
                                 const Point& z) {
    if (axis < 0 || axis >= ctx.n) throw config_error("gamma_k_derivative: axis out of range");
    const double s = std::sqrt(ctx.beta / ctx.mu_H);
    double v = -std::sqrt((k[axis] + 1.0) / 2.0) * gamma_k(ctx, k.raised(axis), z);
    if (k[axis] > 0)
        v += std::sqrt(k[axis] / 2.0) * gamma_k(ctx, k.lowered(axis), z);
    return s * v;
}

} // namespace redqueen
