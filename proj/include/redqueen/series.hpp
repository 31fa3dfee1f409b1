#pragma once

/// Series experiments behind the pulse construction: the bounding sequence
/// gamma_j^k and its square-root-binomial inner sum, the lag series
/// Sigma(k,u) built from exact Hermite-Gauss integrals, boundedness reports
/// for the proven decay exponent and its conjectured sharper variant, the
/// binomial product inequality, and the outer partial sums with their
/// geometric rate.  All sums run in a fixed ascending order, positive terms
/// in the linear domain with power-of-two rescaling, so results are
/// reproducible bitwise.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "redqueen/analytic.hpp"
#include "redqueen/errors.hpp"
#include "redqueen/hermite.hpp"
#include "redqueen/model.hpp"
#include "redqueen/numerics.hpp"

namespace redqueen {

/// Scaled parameters of the series experiments.  The decay scale lambda is
/// derived from theta_bar; the exponent b is the profile decay order.
struct SeriesParams {
    double theta_bar;  ///< scaled impact width, mu_H theta / beta
    double lambda;     ///< sqrt(theta_bar / (1 + theta_bar)), in (0, 1)
    double b;          ///< coefficient decay exponent
    double c_bar;      ///< scaled pulse speed
    double ell_bar;    ///< scaled lag
    int n;             ///< dimension the weights refer to

    explicit SeriesParams(double theta_bar_, double b_ = 5.0, double c_bar_ = 0.0,
                          double ell_bar_ = 0.0, int n_ = 2)
        : theta_bar(theta_bar_),
          lambda(std::sqrt(theta_bar_ / (1.0 + theta_bar_))),
          b(b_),
          c_bar(c_bar_),
          ell_bar(ell_bar_),
          n(n_) {
        if (!(theta_bar > 0.0) || !std::isfinite(theta_bar))
            throw config_error("SeriesParams: theta_bar must be positive and finite");
        if (!std::isfinite(b) || !std::isfinite(c_bar) || !std::isfinite(ell_bar))
            throw config_error("SeriesParams: non-finite parameter");
        if (n != 1 && n != 2 && n != 3)
            throw config_error("SeriesParams: dimension must be 1, 2, or 3");
    }
};

/// The scaled-width condition under which the decay bounds are proven.
inline bool bound_hypothesis_holds(const SeriesParams& sp) {
    return sp.theta_bar < std::sqrt(5.0) - 2.0;
}

namespace detail {

/// max(1, m)^{1/4}, cached for the hot inner loops.
inline double quartic_root(int m) {
    static const std::vector<double> table = [] {
        std::vector<double> t(1 << 16);
        t[0] = 1.0;
        for (std::size_t i = 1; i < t.size(); ++i)
            t[i] = std::pow(static_cast<double>(i), 0.25);
        return t;
    }();
    if (m <= 0) return 1.0;
    if (m < static_cast<int>(table.size())) return table[static_cast<std::size_t>(m)];
    return std::pow(static_cast<double>(m), 0.25);
}

/// log of sum_{l<=min(j,k)} sqrt(binom(j,l) binom(k,l)) x^l, optionally with
/// the quartic denominators max(1,(j-l))^{1/4} max(1,(k-l))^{1/4}.  Runs in
/// the linear domain with a running term ratio and power-of-two rescaling.
inline double log_inner_sum(int j, int k, double x, bool quartic) {
    const int lmax = std::min(j, k);
    double term = quartic ? 1.0 / (quartic_root(j) * quartic_root(k)) : 1.0;
    double sum = term;
    long rescales = 0;
    for (int l = 0; l < lmax; ++l) {
        double ratio = std::sqrt(static_cast<double>(j - l) * (k - l)) / (l + 1) * x;
        if (quartic)
            ratio *= (quartic_root(k - l) * quartic_root(j - l)) /
                     (quartic_root(k - l - 1) * quartic_root(j - l - 1));
        term *= ratio;
        sum += term;
        if (term > 1e290) {
            term *= 0x1p-1024;
            sum *= 0x1p-1024;
            ++rescales;
        }
    }
    return std::log(sum) + 1024.0 * M_LN2 * static_cast<double>(rescales);
}

}  // namespace detail

/// log of sum_{l<=min(j,k)} sqrt(binom(j,l) binom(k,l)) x^l — the left side
/// of the Cauchy-Schwarz step, bounded by (j+k)/2 log(1+x).
inline double log_binom_sqrt_sum(int j, int k, double x) {
    if (j < 0 || k < 0 || !(x >= 0.0))
        throw config_error("log_binom_sqrt_sum: need j,k >= 0 and x >= 0");
    return detail::log_inner_sum(j, k, x, false);
}

/// Bounding sequence of the coefficient series:
/// (1+j)^{-b} lambda^{j+k} sum_l sqrt(binom(j,l)binom(k,l)) theta_bar^{-l}
///                              / (max(1,(j-l))^{1/4} max(1,(k-l))^{1/4}).
inline double gamma_jk(int j, int k, const SeriesParams& sp) {
    if (j < 0 || k < 0) throw config_error("gamma_jk: indices must be nonnegative");
    return std::exp(-sp.b * std::log1p(static_cast<double>(j)) +
                    (j + k) * std::log(sp.lambda) +
                    detail::log_inner_sum(j, k, 1.0 / sp.theta_bar, true));
}

/// The same sequence without the quartic denominators; dominates gamma_jk.
inline double gamma_jk_plain(int j, int k, const SeriesParams& sp) {
    if (j < 0 || k < 0) throw config_error("gamma_jk_plain: indices must be nonnegative");
    return std::exp(-sp.b * std::log1p(static_cast<double>(j)) +
                    (j + k) * std::log(sp.lambda) +
                    detail::log_inner_sum(j, k, 1.0 / sp.theta_bar, false));
}

namespace detail {

/// Sums gamma_jk over j from j0 until ten consecutive terms fall below
/// 1e-16 of the partial sum and the geometric majorant tail (valid once
/// j+1 > k (1+theta_bar), where the term ratio is provably below
/// lambda sqrt((j+1)/(j+1-k)) < 1) drops below 1e-12.
inline double sum_gamma_over_j(int k, const SeriesParams& sp, int j0 = 0) {
    KahanSum sum;
    int consecutive = 0;
    double last = 0.0;
    const int j_max = 4 * k + 100000;
    for (int j = j0; j <= j_max; ++j) {
        last = gamma_jk(j, k, sp);
        sum.add(last);
        consecutive = last < 1e-16 * sum.value() ? consecutive + 1 : 0;
        if (consecutive >= 10 && static_cast<double>(j + 1) > k * (1.0 + sp.theta_bar)) {
            const double rho =
                sp.lambda * std::sqrt((j + 1.0) / (j + 1.0 - k));
            if (rho < 1.0 && last * rho / (1.0 - rho) < 1e-12) return sum.value();
        }
    }
    throw numeric_error("sum_gamma_over_j: series for k=" + std::to_string(k) +
                        " did not meet the truncation rule");
}

}  // namespace detail

/// Boundedness evidence for a scaled series sup_k (1+k)^exponent sum_j.
struct BoundReport {
    double exponent = 0.0;       ///< the decay exponent tested
    double b = 0.0;              ///< coefficient decay order used
    double theta_bar = 0.0;      ///< scaled impact width used
    int k_max = 0;               ///< last index evaluated
    double sup = 0.0;            ///< global maximum of the scaled sums
    int argmax_k = 0;            ///< where the maximum is attained
    double last_decade_max = 0.0;  ///< max over the final 10% of k
    std::vector<double> scaled;  ///< scaled sums for k = 1..k_max

    /// Evidence of boundedness: the sup is attained before the final 10%.
    bool bounded() const { return argmax_k <= k_max - k_max / 10; }
};

namespace detail {

inline BoundReport scaled_sum_report(const SeriesParams& sp, double exponent, int k_max) {
    if (k_max < 10) throw config_error("scaled sums: k_max must be at least 10");
    BoundReport rep;
    rep.exponent = exponent;
    rep.b = sp.b;
    rep.theta_bar = sp.theta_bar;
    rep.k_max = k_max;
    rep.scaled.resize(static_cast<std::size_t>(k_max));
    const int decade_start = k_max - k_max / 10;
    for (int k = 1; k <= k_max; ++k) {
        const double value =
            std::pow(1.0 + k, exponent) * detail::sum_gamma_over_j(k, sp);
        rep.scaled[static_cast<std::size_t>(k - 1)] = value;
        if (value > rep.sup) {
            rep.sup = value;
            rep.argmax_k = k;
        }
        if (k > decade_start) rep.last_decade_max = std::max(rep.last_decade_max, value);
    }
    return rep;
}

}  // namespace detail

/// Scaled sums (1+k)^{b-1/2} sum_j gamma_j^k for k = 1..k_max: the proven
/// decay exponent.  Requires the scaled-width bound hypothesis.
inline BoundReport verify_limsup(const SeriesParams& sp, int k_max) {
    if (!bound_hypothesis_holds(sp))
        throw infeasible_error(
            "verify_limsup: requires theta_bar < sqrt(5) - 2 (bound hypothesis)");
    return detail::scaled_sum_report(sp, sp.b - 0.5, k_max);
}

/// Scaled sums with the conjectured sharper exponent b - 1/n; produces
/// evidence only, never asserts.
inline BoundReport verify_conjecture(const SeriesParams& sp, int n, int k_max) {
    if (n < 1) throw config_error("verify_conjecture: dimension must be positive");
    if (!bound_hypothesis_holds(sp))
        throw infeasible_error(
            "verify_conjecture: requires theta_bar < sqrt(5) - 2 (bound hypothesis)");
    return detail::scaled_sum_report(sp, sp.b - 1.0 / n, k_max);
}

// ---------------------------------------------------------------------------
// Lag series from the exact Hermite-Gauss integrals.

struct SigmaResult {
    double value = 0.0;       ///< the summed series
    double tail_bound = 0.0;  ///< geometric estimate of the truncated tail
    int terms = 0;            ///< number of terms consumed
};

/// The one-dimensional lag series: sum over j of the normalized
/// Hermite-Gauss product at shift -(c_bar tau + ell_bar) u with weights
/// p(j)^{-1/n} (1+j)^{-(b-1/n)}, p(0)=1 and p(j)=j otherwise.  Truncates
/// when ten consecutive terms fall below 1e-16 of the partial sum and the
/// geometric tail estimate is below 1e-12.
inline SigmaResult sigma_series(int k, int u, const SeriesParams& sp,
                                const ModelParams& params) {
    if (k < 0) throw config_error("sigma_series: k must be nonnegative");
    if (u != 0 && u != 1) throw config_error("sigma_series: u must be 0 or 1");
    const ModelParams prm = params.validated();
    const double kappa = -(sp.c_bar * pursuit_delay(prm) + sp.ell_bar) * u;
    const double inv_n = 1.0 / sp.n;

    KahanSum sum;
    int consecutive = 0;
    double last_nonzero = 0.0, max_ratio = 0.0;
    SigmaResult out;
    for (int j = 0; j <= 200000; ++j) {
        const double p = j == 0 ? 1.0 : static_cast<double>(j);
        const double term =
            std::fabs(hermite_gauss_product_scaled(j, k, sp.theta_bar, kappa)) *
            std::pow(p, -inv_n) * std::pow(1.0 + j, -(sp.b - inv_n));
        sum.add(term);
        if (term > 0.0) {
            if (last_nonzero > 0.0) max_ratio = std::max(max_ratio, term / last_nonzero);
            last_nonzero = term;
        }
        consecutive = term < 1e-16 * sum.value() ? consecutive + 1 : 0;
        if (consecutive >= 10 && j > k) {
            // Ratios settle toward lambda; use the worst recently observed
            // rate (or lambda if larger) as the geometric estimate.
            const double rho = std::min(0.999, std::max(sp.lambda, max_ratio));
            const double tail = last_nonzero * rho / (1.0 - rho);
            if (tail < 1e-12) {
                out.value = sum.value();
                out.tail_bound = tail;
                out.terms = j + 1;
                return out;
            }
            max_ratio = 0.0;  // re-measure the rate over the next stretch
        }
    }
    throw numeric_error("sigma_series: truncation rule not met within 200000 terms");
}

// ---------------------------------------------------------------------------
// Binomial product inequality.

/// Checks binom(j,l) binom(k,l) <= binom((j+k)/2, l)^2: exactly in 256-bit
/// integers when j+k is even (log-domain fallback only if a single
/// coefficient exceeds 128 bits), and through log-gamma with 1e-12 slack
/// when (j+k)/2 is a half-integer.
inline bool binom_inequality(int j, int k, int l) {
    if (l < 0 || l > std::min(j, k))
        throw config_error("binom_inequality: need 0 <= l <= min(j, k)");
    if ((j + k) % 2 == 0) {
        try {
            const unsigned __int128 bj =
                binomial_u128(static_cast<unsigned>(j), static_cast<unsigned>(l));
            const unsigned __int128 bk =
                binomial_u128(static_cast<unsigned>(k), static_cast<unsigned>(l));
            const unsigned __int128 bm =
                binomial_u128(static_cast<unsigned>((j + k) / 2), static_cast<unsigned>(l));
            return compare_products_exact(bj, bk, bm, bm) <= 0;
        } catch (const numeric_error&) {
            // a coefficient exceeds 128 bits: fall through to the log path
        }
    }
    const double m = 0.5 * (j + k);
    const double lhs = log_binomial(static_cast<std::uint64_t>(j), static_cast<std::uint64_t>(l)) +
                       log_binomial(static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(l));
    const double rhs = 2.0 * (std::lgamma(m + 1.0) - log_factorial(static_cast<std::uint64_t>(l)) -
                              std::lgamma(m - l + 1.0));
    return lhs <= rhs + 1e-12;
}

// ---------------------------------------------------------------------------
// Outer partial sums and their geometric rate.

struct PartBounds {
    double part_i = 0.0;          ///< sum over j <= k/2
    double part_ii = 0.0;         ///< sum over j >= 3k/2
    double geometric_rate = 0.0;  ///< q = sqrt(2 sqrt(2) lambda / (1 + theta_bar))
};

/// The two outer partial sums of the band decomposition at index k, with
/// the geometric rate that bounds them.  Requires the bound hypothesis,
/// under which q < 1.
inline PartBounds proof_part_bounds(const SeriesParams& sp, int k) {
    if (k < 2) throw config_error("proof_part_bounds: k must be at least 2");
    if (!bound_hypothesis_holds(sp))
        throw infeasible_error(
            "proof_part_bounds: requires theta_bar < sqrt(5) - 2 (bound hypothesis)");
    PartBounds out;
    out.geometric_rate =
        std::sqrt(2.0 * std::sqrt(2.0) * sp.lambda / (1.0 + sp.theta_bar));
    KahanSum head;
    for (int j = 0; j <= k / 2; ++j) head.add(gamma_jk(j, k, sp));
    out.part_i = head.value();
    out.part_ii = detail::sum_gamma_over_j(k, sp, (3 * k + 1) / 2);
    return out;
}

}  // namespace redqueen
