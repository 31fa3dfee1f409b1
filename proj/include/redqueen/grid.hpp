#pragma once

/// Uniform tensor grid on a square box [lo, hi]^n (n = 1 or 2) with the
/// discrete calculus the time stepper needs: trapezoid mass / mean-phenotype
/// quadrature (bitwise deterministic), second-order Laplacian with
/// homogeneous Dirichlet ghost values, a fourth-order reference Laplacian,
/// and integer-cell shifts for the comoving frame.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "redqueen/errors.hpp"
#include "redqueen/model.hpp"
#include "redqueen/numerics.hpp"

namespace redqueen {

struct Grid {
    int n;      ///< dimension, 1 or 2
    double lo;  ///< left edge of every axis
    double hi;  ///< right edge of every axis
    int m;      ///< points per axis, >= 16

    Grid(int n_, double lo_, double hi_, int m_) : n(n_), lo(lo_), hi(hi_), m(m_) {
        if (n != 1 && n != 2) throw config_error("grid: dimension must be 1 or 2");
        if (!(hi > lo)) throw config_error("grid: box must satisfy hi > lo");
        if (m < 16) throw config_error("grid: need at least 16 points per axis");
        if (!std::isfinite(lo) || !std::isfinite(hi))
            throw config_error("grid: box edges must be finite");
    }

    double dx() const { return (hi - lo) / (m - 1); }
    std::size_t size() const {
        return n == 1 ? static_cast<std::size_t>(m)
                      : static_cast<std::size_t>(m) * static_cast<std::size_t>(m);
    }
    double coord(int i) const { return lo + i * dx(); }

    /// Flat index (row-major; the second axis is contiguous when n = 2).
    std::size_t index(int i, int j = 0) const {
        return n == 1 ? static_cast<std::size_t>(i)
                      : static_cast<std::size_t>(i) * m + static_cast<std::size_t>(j);
    }
    Point point(std::size_t flat) const {
        if (n == 1) return {coord(static_cast<int>(flat)), 0.0};
        return {coord(static_cast<int>(flat / m)), coord(static_cast<int>(flat % m))};
    }

    bool operator==(const Grid& o) const {
        return n == o.n && lo == o.lo && hi == o.hi && m == o.m;
    }
};

using Field = std::vector<double>;

/// Trapezoid quadrature weight of axis node i (dx factor included).
inline double axis_weight(const Grid& g, int i) {
    return (i == 0 || i == g.m - 1) ? 0.5 * g.dx() : g.dx();
}

/// Throws if the field has the wrong length, non-finite entries, or negative
/// values beyond the roundoff allowance 1e-8 * max(field).
inline void validate_field(const Grid& g, const Field& v, const std::string& name) {
    if (v.size() != g.size())
        throw config_error("field '" + name + "': size " + std::to_string(v.size()) +
                           " does not match grid size " + std::to_string(g.size()));
    double vmin = v.empty() ? 0.0 : v[0];
    double vmax = vmin;
    for (double x : v) {
        if (!std::isfinite(x))
            throw numeric_error("field '" + name + "': non-finite value encountered");
        vmin = std::min(vmin, x);
        vmax = std::max(vmax, x);
    }
    const double tol_neg = 1e-8 * std::max(vmax, 0.0);
    if (vmin < -tol_neg)
        throw instability_error("field '" + name + "': negative value " +
                                std::to_string(vmin) + " below tolerance " +
                                std::to_string(-tol_neg));
}

/// Total mass int v dz by the trapezoid rule (deterministic pairwise sum).
inline double quadrature_mass(const Grid& g, const Field& v) {
    if (v.size() != g.size()) throw config_error("quadrature_mass: field/grid size mismatch");
    if (g.n == 1)
        return pairwise_sum(0, v.size(),
                            [&](std::size_t i) { return axis_weight(g, static_cast<int>(i)) * v[i]; });
    return pairwise_sum(0, v.size(), [&](std::size_t f) {
        const int i = static_cast<int>(f) / g.m, j = static_cast<int>(f) % g.m;
        return axis_weight(g, i) * axis_weight(g, j) * v[f];
    });
}

struct FieldMoments {
    double mass = 0.0;
    Point mean{0.0, 0.0};  ///< mass-weighted mean position
};

/// Mass and mean phenotype in one deterministic pass.  Throws
/// degenerate_mass_error when the mass is too small to define a mean.
inline FieldMoments quadrature_moments(const Grid& g, const Field& v,
                                       double mass_floor = 1e-300) {
    if (v.size() != g.size())
        throw config_error("quadrature_moments: field/grid size mismatch");
    struct Acc {
        double mass, m0, m1;
    };
    // Pairwise tree over Acc triples: same split as pairwise_sum so each
    // component matches a standalone pairwise pass bit for bit.
    auto term = [&](std::size_t f) -> Acc {
        double w;
        Point z;
        if (g.n == 1) {
            w = axis_weight(g, static_cast<int>(f));
            z = {g.coord(static_cast<int>(f)), 0.0};
        } else {
            const int i = static_cast<int>(f) / g.m, j = static_cast<int>(f) % g.m;
            w = axis_weight(g, i) * axis_weight(g, j);
            z = {g.coord(i), g.coord(j)};
        }
        const double wv = w * v[f];
        return {wv, wv * z[0], wv * z[1]};
    };
    auto reduce = [&](auto&& self, std::size_t b, std::size_t e) -> Acc {
        if (e - b <= 32) {
            Acc a{0.0, 0.0, 0.0};
            for (std::size_t f = b; f < e; ++f) {
                const Acc t = term(f);
                a.mass += t.mass;
                a.m0 += t.m0;
                a.m1 += t.m1;
            }
            return a;
        }
        const std::size_t mid = b + (e - b) / 2;
        const Acc l = self(self, b, mid), r = self(self, mid, e);
        return {l.mass + r.mass, l.m0 + r.m0, l.m1 + r.m1};
    };
    const Acc a = reduce(reduce, 0, v.size());
    if (!(a.mass > mass_floor))
        throw degenerate_mass_error("quadrature_moments: mass " + std::to_string(a.mass) +
                                    " too small to define a mean phenotype");
    return {a.mass, {a.m0 / a.mass, g.n == 2 ? a.m1 / a.mass : 0.0}};
}

/// Second-order central Laplacian; values outside the box are taken as zero
/// (homogeneous Dirichlet ghosts).
inline void laplacian(const Grid& g, const Field& in, Field& out) {
    if (in.size() != g.size()) throw config_error("laplacian: field/grid size mismatch");
    out.resize(in.size());
    const double inv2 = 1.0 / (g.dx() * g.dx());
    if (g.n == 1) {
        for (int i = 0; i < g.m; ++i) {
            const double l = i > 0 ? in[i - 1] : 0.0;
            const double r = i < g.m - 1 ? in[i + 1] : 0.0;
            out[i] = (l - 2.0 * in[i] + r) * inv2;
        }
        return;
    }
    for (int i = 0; i < g.m; ++i) {
        for (int j = 0; j < g.m; ++j) {
            const std::size_t f = g.index(i, j);
            const double xm = i > 0 ? in[f - g.m] : 0.0;
            const double xp = i < g.m - 1 ? in[f + g.m] : 0.0;
            const double ym = j > 0 ? in[f - 1] : 0.0;
            const double yp = j < g.m - 1 ? in[f + 1] : 0.0;
            out[f] = (xm + xp + ym + yp - 4.0 * in[f]) * inv2;
        }
    }
}

/// Fourth-order central Laplacian used as an independent reference when
/// measuring second-order residuals.  Ghost values outside the box are zero,
/// so full accuracy holds only where the field has decayed near the edges.
inline void laplacian4(const Grid& g, const Field& in, Field& out) {
    if (in.size() != g.size()) throw config_error("laplacian4: field/grid size mismatch");
    out.resize(in.size());
    const double c = 1.0 / (12.0 * g.dx() * g.dx());
    auto at1 = [&](int i) { return (i >= 0 && i < g.m) ? in[i] : 0.0; };
    if (g.n == 1) {
        for (int i = 0; i < g.m; ++i)
            out[i] = (-at1(i - 2) + 16.0 * at1(i - 1) - 30.0 * in[i] + 16.0 * at1(i + 1) -
                      at1(i + 2)) *
                     c;
        return;
    }
    auto at2 = [&](int i, int j) {
        return (i >= 0 && i < g.m && j >= 0 && j < g.m) ? in[g.index(i, j)] : 0.0;
    };
    for (int i = 0; i < g.m; ++i) {
        for (int j = 0; j < g.m; ++j) {
            const double axis_i = -at2(i - 2, j) + 16.0 * at2(i - 1, j) + 16.0 * at2(i + 1, j) -
                                  at2(i + 2, j);
            const double axis_j = -at2(i, j - 2) + 16.0 * at2(i, j - 1) + 16.0 * at2(i, j + 1) -
                                  at2(i, j + 2);
            out[g.index(i, j)] = (axis_i + axis_j - 60.0 * in[g.index(i, j)]) * c;
        }
    }
}

/// Shifts the field by an integer number of cells per axis (positive shift
/// moves content toward larger coordinates); vacated cells are zero-filled.
inline void shift_field(const Grid& g, const Field& in, const std::array<int, 2>& cells,
                        Field& out) {
    if (in.size() != g.size()) throw config_error("shift_field: field/grid size mismatch");
    out.assign(in.size(), 0.0);
    if (g.n == 1) {
        for (int i = 0; i < g.m; ++i) {
            const int src = i - cells[0];
            if (src >= 0 && src < g.m) out[i] = in[src];
        }
        return;
    }
    for (int i = 0; i < g.m; ++i) {
        const int si = i - cells[0];
        if (si < 0 || si >= g.m) continue;
        for (int j = 0; j < g.m; ++j) {
            const int sj = j - cells[1];
            if (sj >= 0 && sj < g.m) out[g.index(i, j)] = in[g.index(si, sj)];
        }
    }
}

}  // namespace redqueen
