#pragma once

/// Principal (largest) eigenpair of the Schrodinger-type operator
/// L u = mu2 * lap(u) + V .* u on a grid with homogeneous Dirichlet
/// boundary values.  Shifted inverse power iteration: each inner solve of
/// (s I - L) w = v uses Jacobi-preconditioned conjugate gradients, and the
/// shift tracks the Rayleigh quotient once the iterate is close.  The
/// returned eigenfunction is l2-normalized and positive.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "redqueen/errors.hpp"
#include "redqueen/grid.hpp"

namespace redqueen {

struct EigenOptions {
    double tol = 1e-8;  ///< target two-norm of L v - lambda v
    int max_outer = 200;
    int max_cg = 200000;
    const Field* warm_start = nullptr;  ///< previous eigenfunction, if any
};

struct EigenResult {
    double lambda = 0.0;
    Field v;  ///< l2-normalized positive eigenfunction
    double residual = 0.0;
    int outer_iterations = 0;
};

namespace detail {

inline double dot_l2(const Field& a, const Field& b) {
    double s = 0.0;
    for (std::size_t f = 0; f < a.size(); ++f) s += a[f] * b[f];
    return s;
}

struct ShiftTooLow {};  ///< internal signal: CG met negative curvature

/// Solves (s I - L) x = b to a relative residual, overwriting x.
inline void pcg_shifted(const Grid& g, double mu2, const Field& V, double s, const Field& b,
                        Field& x, double rel_tol, int max_cg, Field& r, Field& z, Field& p,
                        Field& Ap, Field& lap) {
    const std::size_t N = b.size();
    const double lap_diag = -2.0 * g.n / (g.dx() * g.dx());
    x.assign(N, 0.0);
    r = b;
    z.resize(N);
    Ap.resize(N);
    for (std::size_t f = 0; f < N; ++f) z[f] = r[f] / (s - mu2 * lap_diag - V[f]);
    p = z;
    double rz = dot_l2(r, z);
    const double bnorm = std::sqrt(dot_l2(b, b));
    if (bnorm == 0.0) return;
    for (int it = 0; it < max_cg; ++it) {
        laplacian(g, p, lap);
        for (std::size_t f = 0; f < N; ++f) Ap[f] = s * p[f] - mu2 * lap[f] - V[f] * p[f];
        const double pAp = dot_l2(p, Ap);
        if (!(pAp > 0.0)) throw ShiftTooLow{};
        const double alpha = rz / pAp;
        double rnorm2 = 0.0;
        for (std::size_t f = 0; f < N; ++f) {
            x[f] += alpha * p[f];
            r[f] -= alpha * Ap[f];
            rnorm2 += r[f] * r[f];
        }
        if (std::sqrt(rnorm2) <= rel_tol * bnorm) return;
        for (std::size_t f = 0; f < N; ++f) z[f] = r[f] / (s - mu2 * lap_diag - V[f]);
        const double rz_new = dot_l2(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t f = 0; f < N; ++f) p[f] = z[f] + beta * p[f];
    }
    throw numeric_error("pcg_shifted: no convergence within the iteration budget");
}

}  // namespace detail

inline EigenResult principal_eigen(const Grid& g, double mu2, const Field& V,
                                   EigenOptions opt = {}) {
    if (V.size() != g.size()) throw config_error("principal_eigen: potential/grid size mismatch");
    if (!(mu2 > 0.0)) throw config_error("principal_eigen: diffusivity must be positive");
    const std::size_t N = g.size();
    double vmax = V[0];
    for (double x : V) {
        if (!std::isfinite(x)) throw numeric_error("principal_eigen: non-finite potential");
        vmax = std::max(vmax, x);
    }

    Field v;
    if (opt.warm_start && opt.warm_start->size() == N)
        v = *opt.warm_start;
    else
        v.assign(N, 1.0);
    {
        const double nrm = std::sqrt(detail::dot_l2(v, v));
        if (!(nrm > 0.0)) throw config_error("principal_eigen: zero start vector");
        for (double& x : v) x /= nrm;
    }

    Field Lv(N), w, r, z, p, Ap, lap;
    EigenResult out;
    // The Rayleigh quotient of any vector lower-bounds the principal
    // eigenvalue, so shifting slightly above it keeps s I - L positive
    // definite; the margin shrinks with the residual for fast convergence.
    for (int outer = 1; outer <= opt.max_outer; ++outer) {
        laplacian(g, v, lap);
        for (std::size_t f = 0; f < N; ++f) Lv[f] = mu2 * lap[f] + V[f] * v[f];
        const double lambda = detail::dot_l2(v, Lv);
        double res2 = 0.0;
        for (std::size_t f = 0; f < N; ++f) {
            const double d = Lv[f] - lambda * v[f];
            res2 += d * d;
        }
        out.lambda = lambda;
        out.residual = std::sqrt(res2);
        out.outer_iterations = outer;
        if (out.residual < opt.tol) break;
        if (outer == opt.max_outer)
            throw numeric_error("principal_eigen: residual " + std::to_string(out.residual) +
                                " above tolerance after max iterations");

        double margin = out.residual < 0.05 ? std::max(10.0 * out.residual, 0.01)
                                            : vmax - lambda + 1.0;
        const double cg_tol = std::max(1e-13, 1e-3 * std::min(out.residual, 1.0));
        for (;;) {
            try {
                detail::pcg_shifted(g, mu2, V, lambda + margin, v, w, cg_tol, opt.max_cg, r, z,
                                    p, Ap, lap);
                break;
            } catch (const detail::ShiftTooLow&) {
                margin *= 4.0;  // Rayleigh margin was optimistic; back off
                if (margin > 2.0 * (vmax - lambda + 1.0))
                    throw numeric_error("principal_eigen: failed to find a definite shift");
            }
        }
        double nrm = std::sqrt(detail::dot_l2(w, w));
        if (!(nrm > 0.0)) throw numeric_error("principal_eigen: inverse iterate vanished");
        double sum = 0.0;
        for (double x : w) sum += x;
        if (sum < 0.0) nrm = -nrm;  // keep the positive branch
        for (std::size_t f = 0; f < N; ++f) v[f] = w[f] / nrm;
    }
    out.v = std::move(v);
    return out;
}

}  // namespace redqueen
