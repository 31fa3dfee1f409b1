#pragma once

/// Linearization of the pulse equations around the impact-free limit, in the
/// oscillator eigenbasis.  The linearized operator acts diagonally on the
/// expansion coefficients except for two rank-one couplings: the host-mass
/// correction enters the constant mode and the speed correction enters the
/// first mode along the lag axis.  Inversion is therefore closed-form once
/// the mass and first-moment of the profile correction are prescribed.
/// Built on top: the first-order response of (host mass, pulse speed) to a
/// small pathogen impact, and the alternating lattice series that controls
/// its sign.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "redqueen/analytic.hpp"
#include "redqueen/errors.hpp"
#include "redqueen/hermite.hpp"
#include "redqueen/model.hpp"
#include "redqueen/numerics.hpp"

namespace redqueen {

/// Sparse coefficient vector on the eigenbasis, ordered deterministically.
using SpectralVector = std::map<MultiIndex, double>;

/// First basis index along the lag axis (the mode carrying the speed).
inline MultiIndex lag_mode(int n) { return MultiIndex(1, n); }

/// Mass of the expansion: sum of coefficients times basis moments.
inline double spectral_mass(const HermiteContext& ctx, const SpectralVector& v) {
    KahanSum s;
    for (const auto& [k, value] : v) s.add(value * moment_mk(ctx, k));
    return s.value();
}

/// First moment along the lag axis of the expansion.
inline double spectral_first_moment(const HermiteContext& ctx, const SpectralVector& v) {
    KahanSum s;
    for (const auto& [k, value] : v) s.add(value * first_moment_wik(ctx, 0, k));
    return s.value();
}

struct LinearizedSolution {
    SpectralVector phi;  ///< profile correction coefficients
    double eta = 0.0;    ///< host-mass correction
    double c = 0.0;      ///< speed correction
};

namespace detail {

/// log of the odd-axis weight in the speed series:
/// sqrt(k1!) / (2^{k1/2} ((k1-1)/2)!) times even-axis analogues.
inline double log_speed_weight(const MultiIndex& k) {
    double lw = 0.5 * log_factorial(k[0]) - 0.5 * k[0] * std::log(2.0) -
                log_factorial((k[0] - 1) / 2);
    for (int i = 1; i < k.n; ++i)
        lw += 0.5 * log_factorial(k[i]) - 0.5 * k[i] * std::log(2.0) -
              log_factorial(k[i] / 2);
    return lw;
}

inline bool in_speed_family(const MultiIndex& k) {
    if (k[0] % 2 != 1) return false;
    for (int i = 1; i < k.n; ++i)
        if (k[i] % 2 != 0) return false;
    return true;
}

inline bool all_even(const MultiIndex& k) {
    for (int i = 0; i < k.n; ++i)
        if (k[i] % 2 != 0) return false;
    return true;
}

/// Rejects spectra whose coefficients do not decay across levels: the
/// inversion series for the speed and the constant mode are then unreliable.
inline void require_decaying(const SpectralVector& f) {
    std::map<int, double> level_max;
    for (const auto& [k, value] : f)
        if (value != 0.0) {
            double& m = level_max[k.sigma()];
            m = std::max(m, std::fabs(value));
        }
    if (level_max.empty()) return;
    const int top = level_max.rbegin()->first;
    if (top < 10) return;  // too few levels to judge decay
    double head = 0.0;
    for (const auto& [s, m] : level_max)
        if (s <= top / 2) head = std::max(head, m);
    if (level_max.rbegin()->second > 0.5 * head)
        throw numeric_error(
            "linearized_inverse: spectral input does not decay across levels; "
            "the inversion series is unreliable");
}

}  // namespace detail

/// Applies the linearized operator to (phi, eta, c).
inline SpectralVector linearized_forward(const HermiteContext& ctx, double gamma_H,
                                         const LinearizedSolution& sol) {
    const double mu = ctx.mu_H, beta = ctx.beta;
    const double g0 = std::pow(beta / (4.0 * M_PI * mu), 0.25 * ctx.n);
    SpectralVector f;
    for (const auto& [k, value] : sol.phi) {
        const double fk = -2.0 * mu * beta * k.sigma() * value;
        if (fk != 0.0) f[k] = fk;
    }
    f[MultiIndex(0, ctx.n)] -= gamma_H * sol.eta * g0;
    f[lag_mode(ctx.n)] -= sol.c * std::sqrt(beta / (2.0 * mu)) * g0;
    return f;
}

/// Inverts the linearized operator: recovers (phi, eta, c) from the
/// right-hand side f and the prescribed mass and first moment of phi.
inline LinearizedSolution linearized_inverse(const HermiteContext& ctx, double gamma_H,
                                             const SpectralVector& f, double mass = 0.0,
                                             double first_moment = 0.0) {
    if (!(gamma_H > 0.0)) throw config_error("linearized_inverse: gamma_H must be positive");
    detail::require_decaying(f);
    const double mu = ctx.mu_H, beta = ctx.beta;
    const int n = ctx.n;
    const MultiIndex zero(0, n), u = lag_mode(n);
    auto at = [&](const MultiIndex& k) {
        const auto it = f.find(k);
        return it == f.end() ? 0.0 : it->second;
    };

    LinearizedSolution sol;
    sol.eta = -(at(zero) / gamma_H) * std::pow(4.0 * M_PI * mu / beta, 0.25 * n);

    // Speed: first-moment constraint across the odd-first-axis family.
    KahanSum speed_series;
    for (const auto& [k, value] : f)
        if (value != 0.0 && detail::in_speed_family(k))
            speed_series.add(std::exp(detail::log_speed_weight(k)) * value / k.sigma());
    sol.c = -2.0 * beta * mu * first_moment -
            2.0 * std::sqrt(mu / beta) * std::pow(4.0 * M_PI * mu / beta, 0.25 * n) *
                speed_series.value();

    // Diagonal modes.
    for (const auto& [k, value] : f) {
        if (k == zero || k == u || value == 0.0) continue;
        sol.phi[k] = -value / (2.0 * mu * beta * k.sigma());
    }
    // Lag mode: carries the speed coupling.
    const double phi_u = -at(u) / (2.0 * mu * beta) -
                         (sol.c / (2.0 * mu)) * (1.0 / std::sqrt(2.0 * mu * beta)) *
                             std::pow(beta / (4.0 * M_PI * mu), 0.25 * n);
    if (phi_u != 0.0) sol.phi[u] = phi_u;

    // Constant mode: fixed by the mass constraint across the even family.
    KahanSum mass_series;
    for (const auto& [k, value] : f) {
        if (value == 0.0 || k == zero || !detail::all_even(k)) continue;
        double lw = 0.0;  // prod_i sqrt(k_i!) / (2^{k_i/2} (k_i/2)!)
        for (int i = 0; i < n; ++i)
            lw += 0.5 * log_factorial(k[i]) - 0.5 * k[i] * std::log(2.0) -
                  log_factorial(k[i] / 2);
        mass_series.add(std::exp(lw) * value / (0.5 * k.sigma()));
    }
    const double phi_0 = std::pow(beta / (4.0 * mu * M_PI), 0.25 * n) * mass +
                         mass_series.value() / (4.0 * mu * beta);
    if (phi_0 != 0.0) sol.phi[zero] = phi_0;
    return sol;
}

/// Convenience overload taking the model parameters directly.
inline LinearizedSolution linearized_inverse(const SpectralVector& f, double mass,
                                             double first_moment, const ModelParams& params) {
    const ModelParams prm = params.validated();
    if (!(prm.beta > 0.0))
        throw config_error("linearized_inverse: requires a cohesion term (beta > 0)");
    return linearized_inverse(HermiteContext(prm.mu_H(), prm.beta, prm.n), prm.gamma_H, f,
                              mass, first_moment);
}

// ---------------------------------------------------------------------------
// First-order response of (host mass, speed) to a small pathogen impact.

struct ResponseResult {
    double eta_deriv = 0.0;  ///< d(host mass correction)/d(impact strength) at 0
    double c_deriv = 0.0;    ///< d(speed)/d(impact strength) at 0
    double c_tail_bound = 0.0;  ///< bound on the truncated remainder of c_deriv
    int sigma_max = 0;          ///< truncation level of the expansion
};

/// Differentiates the pulse (mass, speed) with respect to the peak impact at
/// zero impact, by projecting the impact kernel onto the eigenbasis and
/// inverting the linearized operator with zero mass/moment corrections.
/// Requires the lag to point along the first axis and all hypotheses of the
/// small-impact construction.
inline ResponseResult first_order_response(const ModelParams& params, int sigma_max = 40) {
    const ModelParams prm = params.validated();
    if (prm.u[0] != 1.0 || (prm.n == 2 && prm.u[1] != 0.0))
        throw config_error(
            "first_order_response: coordinates must be aligned with the lag (u = e1)");
    const PulseConditions cond = pulse_conditions(prm);
    if (!cond.all())
        throw infeasible_error(std::string("first_order_response: hypotheses fail:") +
                               (cond.pathogen_viable ? "" : " pathogen-viability") +
                               (cond.host_viable ? "" : " host-viability") +
                               (cond.cohesion_dominates ? "" : " cohesion-dominance"));
    if (sigma_max < 4) throw config_error("first_order_response: sigma_max too small");

    const double mu = prm.mu_H(), beta = prm.beta;
    const HermiteContext ctx(mu, beta, prm.n);
    const double theta_bar = mu * prm.theta / beta;
    const double ell_bar = std::sqrt(beta / mu) * prm.ell;
    const double M = pulse_pathogen_mass(prm, 0.0, unperturbed_host(prm).H);

    SpectralVector f;
    const double front = M * std::pow(2.0 * M_PI, -0.5 * prm.n);
    for (const MultiIndex& k : multi_indices_up_to(prm.n, sigma_max)) {
        double prod = hermite_gauss_product(k[0], 0, theta_bar, -ell_bar);
        for (int i = 1; i < prm.n; ++i) prod *= hermite_gauss_product(k[i], 0, theta_bar, 0.0);
        if (prod == 0.0) continue;
        f[k] = front * std::exp(log_norm_constant(ctx, k)) * prod;
    }

    const LinearizedSolution sol = linearized_inverse(ctx, prm.gamma_H, f, 0.0, 0.0);

    // Tail of the speed series beyond sigma_max, from the classical Hermite
    // bound: level s holds at most (s+1)^{n-1} modes, each below A lambda^s,
    // with odd-axis weights below (1+s)^{1/4}.
    const double lambda = std::sqrt(theta_bar / (1.0 + theta_bar));
    const double A = front * std::pow(beta / (M_PI * mu), 0.25 * prm.n) *
                     std::pow(M_PI / (1.0 + theta_bar), 0.5 * prm.n) *
                     std::exp(-0.5 * lambda * lambda * ell_bar * ell_bar);
    const double S = sigma_max;
    const double p = prm.n - 0.75;  // polynomial growth exponent of level sums
    const double denom = 1.0 - lambda * std::exp(p / (S + 2.0));
    const double level_tail =
        denom > 0.0 ? std::pow(S + 2.0, p) * std::pow(lambda, S + 1.0) / denom
                    : std::numeric_limits<double>::infinity();
    ResponseResult out;
    out.eta_deriv = sol.eta;
    out.c_deriv = sol.c;
    out.c_tail_bound = 2.0 * std::sqrt(mu / beta) *
                       std::pow(4.0 * M_PI * mu / beta, 0.25 * prm.n) * A * level_tail;
    out.sigma_max = sigma_max;
    return out;
}

// ---------------------------------------------------------------------------
// Alternating lattice series controlling the sign of the speed response.

namespace detail {

/// log of the positive lattice summand g(j).
inline double log_lattice_g(double lambda, const MultiIndex& j) {
    const double lh = std::log(0.5 * lambda);
    double lg = -std::log(2.0 * j.sigma() + 1.0) + log_factorial(2 * j[0] + 1) -
                2.0 * log_factorial(j[0]) + (2.0 * j[0] + 1.0) * lh;
    for (int i = 1; i < j.n; ++i) lg += -log_factorial(j[i]) + 2.0 * j[i] * lh;
    return lg;
}

}  // namespace detail

/// Margin of the corner-domination inequality at lattice point j: the
/// summand minus the sum over odd corners of the adjacent unit cube.
/// Positive margins at every j make the alternating series sign-definite.
inline double lattice_claim_margin(double lambda, const MultiIndex& j) {
    if (!(lambda > 0.0 && lambda < 1.0))
        throw config_error("lattice_claim_margin: lambda must be in (0, 1)");
    const double g = std::exp(detail::log_lattice_g(lambda, j));
    double corners = 0.0;
    const int ncorners = 1 << j.n;
    for (int mask = 1; mask < ncorners; ++mask) {
        if (__builtin_popcount(static_cast<unsigned>(mask)) % 2 == 0) continue;
        MultiIndex jk = j;
        for (int i = 0; i < j.n; ++i)
            if (mask & (1 << i)) jk.k[static_cast<std::size_t>(i)] += 1;
        corners += std::exp(detail::log_lattice_g(lambda, jk));
    }
    return g - corners;
}

/// Sums the alternating lattice series by levels, with the alternating-tail
/// bound justified by decreasing level sums.  For n >= 2 this requires
/// 3 * 2^{n-2} lambda^2 < 1; in one dimension the level ratio is below
/// lambda^2 for every lambda in (0, 1).
inline double alpha0(int n, double lambda) {
    if (n != 1 && n != 2) throw config_error("alpha0: dimension must be 1 or 2");
    if (!(lambda > 0.0 && lambda < 1.0))
        throw config_error("alpha0: lambda must be in (0, 1)");
    if (n >= 2 && !(3.0 * std::pow(2.0, n - 2) * lambda * lambda < 1.0))
        throw infeasible_error(
            "alpha0: level sums are not provably decreasing at this lambda");
    KahanSum alpha;
    double prev_level = 0.0;
    for (int s = 0; s < 100000; ++s) {
        KahanSum level;
        if (n == 1) {
            level.add(std::exp(detail::log_lattice_g(lambda, MultiIndex(s, 1))));
        } else {
            for (int j0 = 0; j0 <= s; ++j0)
                level.add(std::exp(detail::log_lattice_g(lambda, MultiIndex(j0, s - j0, 2))));
        }
        const double G = level.value();
        alpha.add(s % 2 == 0 ? G : -G);
        // Alternating series: the remainder is below the next level sum, so
        // two negligible consecutive levels certify convergence.
        if (s > 2 && G < 1e-16 * std::fabs(alpha.value()) &&
            prev_level < 1e-16 * std::fabs(alpha.value()))
            return alpha.value();
        prev_level = G;
    }
    throw numeric_error("alpha0: series did not converge");
}

}  // namespace redqueen
