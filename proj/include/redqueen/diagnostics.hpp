#pragma once

/// Trajectory diagnostics: quantifies the qualitative regimes of the
/// simulation — spreading or confined rings, straight traveling pulses,
/// rotating pulses — by fitting the motion of the host mean (speed, delay,
/// circle radius, angular velocity) and the constancy of the translating
/// profile, then classifying the run from those fits.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "redqueen/errors.hpp"
#include "redqueen/grid.hpp"
#include "redqueen/model.hpp"
#include "redqueen/solver.hpp"

namespace redqueen {

struct TimeWindow {
    double t0 = 0.0;
    double t1 = 0.0;
};

/// Last fraction of the sampled time span (transient discard).
inline TimeWindow late_window(const Trajectory& traj, double fraction = 0.4) {
    if (traj.samples.empty()) throw config_error("late_window: trajectory has no samples");
    if (!(fraction > 0.0 && fraction <= 1.0))
        throw config_error("late_window: fraction must be in (0, 1]");
    const double t_begin = traj.samples.front().t, t_end = traj.samples.back().t;
    return {t_end - fraction * (t_end - t_begin), t_end};
}

// ---------------------------------------------------------------------------
// Straight-line motion.

struct LinearFit {
    double c_fit = 0.0;         ///< mean speed along the fitted direction
    Point direction{1.0, 0.0};  ///< unit direction, oriented so c_fit >= 0
    double r2 = 0.0;            ///< collinearity of the mean trajectory
};

/// Total-least-squares line through the host-mean samples in the window.
inline LinearFit fit_linear_speed(const Trajectory& traj, const TimeWindow& w) {
    std::vector<double> t;
    std::vector<Point> x;
    for (const TrajectorySample& s : traj.samples)
        if (s.t >= w.t0 && s.t <= w.t1) {
            t.push_back(s.t);
            x.push_back(s.xbar);
        }
    if (t.size() < 10)
        throw config_error("fit_linear_speed: need at least 10 samples in the window");
    const int n = traj.grid.n;
    const double N = static_cast<double>(t.size());

    double tb = 0.0;
    Point xc{0.0, 0.0};
    for (std::size_t i = 0; i < t.size(); ++i) {
        tb += t[i];
        xc = add(xc, x[i]);
    }
    tb /= N;
    xc = scale(xc, 1.0 / N);

    // Scatter matrix of the positions; its leading eigenvector is the line.
    double sxx = 0.0, sxy = 0.0, syy = 0.0, max_abs = 0.0;
    for (const Point& p : x) {
        const Point d = sub(p, xc);
        sxx += d[0] * d[0];
        sxy += d[0] * d[1];
        syy += d[1] * d[1];
        max_abs = std::max({max_abs, std::fabs(p[0]), std::fabs(p[1])});
    }
    const double total = sxx + syy;
    // Coinciding samples: no motion, no line evidence (floor at roundoff).
    const double floor = N * std::pow(1e-13 * (1.0 + max_abs), 2);
    LinearFit fit;
    if (!(total > floor)) return fit;

    if (n == 1) {
        fit.direction = {1.0, 0.0};
        fit.r2 = 1.0;  // one-dimensional motion is trivially collinear
    } else {
        const double half_gap = 0.5 * (sxx - syy);
        const double lead = 0.5 * total + std::sqrt(half_gap * half_gap + sxy * sxy);
        Point d{0.0, 0.0};
        if (std::fabs(sxy) > 0.0)
            d = std::fabs(lead - sxx) < std::fabs(lead - syy) ? Point{lead - syy, sxy}
                                                              : Point{sxy, lead - sxx};
        else
            d = sxx >= syy ? Point{1.0, 0.0} : Point{0.0, 1.0};
        fit.direction = scale(d, 1.0 / std::sqrt(norm2(d, 2)));
        fit.r2 = std::clamp(lead / total, 0.0, 1.0);
    }

    double stt = 0.0, stx = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        stt += (t[i] - tb) * (t[i] - tb);
        stx += (t[i] - tb) * dot(sub(x[i], xc), fit.direction, n);
    }
    if (!(stt > 0.0)) throw config_error("fit_linear_speed: samples share one time");
    fit.c_fit = stx / stt;
    if (fit.c_fit < 0.0) {
        fit.c_fit = -fit.c_fit;
        fit.direction = scale(fit.direction, -1.0);
    }
    return fit;
}

/// Mean lag delay between the host and pathogen means along the motion:
/// delay = (xbar - ybar - ell u) . direction / c, averaged over the window.
inline double fit_delay(const ModelParams& params, const Trajectory& traj, double c_fit,
                        const Point& direction, const TimeWindow& w) {
    const ModelParams prm = params.validated();
    if (!(std::fabs(c_fit) >= 1e-6))
        throw numeric_error("fit_delay: speed below 1e-6; the delay is undefined");
    KahanSum acc;
    std::size_t count = 0;
    for (const TrajectorySample& s : traj.samples) {
        if (s.t < w.t0 || s.t > w.t1) continue;
        if (!std::isfinite(s.ybar[0]) || !std::isfinite(s.ybar[1])) continue;
        const Point gap = sub(sub(s.xbar, s.ybar), scale(prm.u, prm.ell));
        acc.add(dot(gap, direction, prm.n) / c_fit);
        ++count;
    }
    if (count == 0)
        throw numeric_error("fit_delay: no samples with a live pathogen in the window");
    return acc.value() / static_cast<double>(count);
}

// ---------------------------------------------------------------------------
// Circular motion.

struct CircleFit {
    Point center{0.0, 0.0};
    double radius = 0.0;
    double omega = 0.0;  ///< angular velocity from unwrapped-phase regression
    double r2 = 0.0;     ///< radial residual against total position variance
};

/// Algebraic least-squares circle through the host-mean samples, then a
/// linear regression of the unwrapped phase for the angular velocity.
inline CircleFit fit_circle(const Trajectory& traj, const TimeWindow& w) {
    if (traj.grid.n != 2) throw config_error("fit_circle: requires two dimensions");
    std::vector<double> t;
    std::vector<Point> x;
    for (const TrajectorySample& s : traj.samples)
        if (s.t >= w.t0 && s.t <= w.t1) {
            t.push_back(s.t);
            x.push_back(s.xbar);
        }
    if (t.size() < 20)
        throw config_error("fit_circle: need at least 20 samples in the window");
    const double N = static_cast<double>(t.size());

    Point xc{0.0, 0.0};
    for (const Point& p : x) xc = add(xc, p);
    xc = scale(xc, 1.0 / N);

    // Centered normal equations: |xi|^2 = B xi_1 + C xi_2 + D.
    double sxx = 0.0, sxy = 0.0, syy = 0.0, b1 = 0.0, b2 = 0.0, sw = 0.0;
    for (const Point& p : x) {
        const Point d = sub(p, xc);
        const double q = norm2(d, 2);
        sxx += d[0] * d[0];
        sxy += d[0] * d[1];
        syy += d[1] * d[1];
        b1 += d[0] * q;
        b2 += d[1] * q;
        sw += q;
    }
    const double det = sxx * syy - sxy * sxy;
    const double scale2 = 0.5 * (sxx + syy);
    if (!(det > 1e-12 * scale2 * scale2))
        throw numeric_error("fit_circle: samples are collinear; the fit is degenerate");
    const double B = (syy * b1 - sxy * b2) / det;
    const double C = (sxx * b2 - sxy * b1) / det;
    const double D = sw / N;

    CircleFit fit;
    const Point center_c{0.5 * B, 0.5 * C};
    fit.center = add(xc, center_c);
    fit.radius = std::sqrt(std::max(D + norm2(center_c, 2), 0.0));
    if (!(fit.radius > 0.0))
        throw numeric_error("fit_circle: degenerate zero radius");

    // Unwrapped phase around the fitted center.
    std::vector<double> phase(t.size());
    double prev_raw = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const Point d = sub(x[i], fit.center);
        const double raw = std::atan2(d[1], d[0]);
        phase[i] = i == 0 ? raw : phase[i - 1] + std::remainder(raw - prev_raw, 2.0 * M_PI);
        prev_raw = raw;
    }
    double tb = 0.0, pb = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        tb += t[i];
        pb += phase[i];
    }
    tb /= N;
    pb /= N;
    double stt = 0.0, stp = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        stt += (t[i] - tb) * (t[i] - tb);
        stp += (t[i] - tb) * (phase[i] - pb);
    }
    if (!(stt > 0.0)) throw config_error("fit_circle: samples share one time");
    fit.omega = stp / stt;

    double rad_res = 0.0, total = 0.0;
    for (const Point& p : x) {
        const double r = std::sqrt(norm2(sub(p, fit.center), 2));
        rad_res += (r - fit.radius) * (r - fit.radius);
        total += norm2(sub(p, xc), 2);
    }
    fit.r2 = total > 0.0 ? std::clamp(1.0 - rad_res / total, 0.0, 1.0) : 0.0;
    return fit;
}

// ---------------------------------------------------------------------------
// Field shape measures.

/// Multilinear interpolation of a field; zero outside the box.
inline double field_at(const Grid& g, const Field& f, const Point& x) {
    if (f.size() != g.size()) throw config_error("field_at: field/grid size mismatch");
    const double dx = g.dx();
    const double s0 = (x[0] - g.lo) / dx;
    if (s0 < 0.0 || s0 > g.m - 1) return 0.0;
    const int i0 = std::min(static_cast<int>(s0), g.m - 2);
    const double a = s0 - i0;
    if (g.n == 1) return (1.0 - a) * f[g.index(i0)] + a * f[g.index(i0 + 1)];
    const double s1 = (x[1] - g.lo) / dx;
    if (s1 < 0.0 || s1 > g.m - 1) return 0.0;
    const int j0 = std::min(static_cast<int>(s1), g.m - 2);
    const double b = s1 - j0;
    return (1.0 - a) * ((1.0 - b) * f[g.index(i0, j0)] + b * f[g.index(i0, j0 + 1)]) +
           a * ((1.0 - b) * f[g.index(i0 + 1, j0)] + b * f[g.index(i0 + 1, j0 + 1)]);
}

/// One minus the density at its own mean over the density maximum: near one
/// for a ring (minimum at the mean), near zero for a centered blob.
inline double ring_score(const Grid& g, const Field& f) {
    const FieldMoments mom = quadrature_moments(g, f);
    const double fmax = *std::max_element(f.begin(), f.end());
    return 1.0 - field_at(g, f, mom.mean) / fmax;
}

/// Mass-weighted mean distance of the density from its own mean.
inline double mean_radius(const Grid& g, const Field& f) {
    const FieldMoments mom = quadrature_moments(g, f);
    KahanSum acc;
    for (std::size_t idx = 0; idx < f.size(); ++idx) {
        const Point z = g.point(idx);
        const double wgt = g.n == 1 ? axis_weight(g, static_cast<int>(idx))
                                    : axis_weight(g, static_cast<int>(idx / g.m)) *
                                          axis_weight(g, static_cast<int>(idx % g.m));
        acc.add(wgt * f[idx] * std::sqrt(norm2(sub(z, mom.mean), g.n)));
    }
    return acc.value() / mom.mass;
}

/// Mean L1 distance between consecutive mass-normalized snapshots after
/// translating by the fitted motion (sub-cell shifts by linear
/// interpolation); small values certify a constant translating profile.
inline double profile_constancy(const Grid& g, const std::vector<Snapshot>& snapshots,
                                double c_fit, const Point& direction, const TimeWindow& w) {
    std::vector<const Snapshot*> in_window;
    for (const Snapshot& s : snapshots)
        if (s.t >= w.t0 && s.t <= w.t1) in_window.push_back(&s);
    if (in_window.size() < 2)
        throw config_error("profile_constancy: need at least two snapshots in the window");

    KahanSum acc;
    Field norm_a, norm_b, diff(g.size());
    for (std::size_t pair = 0; pair + 1 < in_window.size(); ++pair) {
        const Snapshot& a = *in_window[pair];
        const Snapshot& b = *in_window[pair + 1];
        norm_a = a.h;
        norm_b = b.h;
        const double ma = quadrature_mass(g, norm_a), mb = quadrature_mass(g, norm_b);
        if (!(ma > 0.0) || !(mb > 0.0))
            throw degenerate_mass_error("profile_constancy: snapshot without mass");
        for (double& v : norm_a) v /= ma;
        for (double& v : norm_b) v /= mb;
        // In window coordinates the pulse moves by c dt along the direction
        // minus whatever the comoving frame already absorbed.
        const Point shift = sub(scale(direction, c_fit * (b.t - a.t)), sub(b.offset, a.offset));
        for (std::size_t idx = 0; idx < diff.size(); ++idx) {
            const Point z = add(g.point(idx), shift);
            diff[idx] = std::fabs(norm_a[idx] - field_at(g, norm_b, z));
        }
        acc.add(quadrature_mass(g, diff));
    }
    return acc.value() / static_cast<double>(in_window.size() - 1);
}

// ---------------------------------------------------------------------------
// Classification.

enum class Regime {
    ring_diffusing,
    ring_stationary,
    linear_pulse,
    rotating_pulse,
    undetermined,
};

inline const char* regime_name(Regime r) {
    switch (r) {
        case Regime::ring_diffusing: return "ring-diffusing";
        case Regime::ring_stationary: return "ring-stationary";
        case Regime::linear_pulse: return "linear-pulse";
        case Regime::rotating_pulse: return "rotating-pulse";
        case Regime::undetermined: return "undetermined";
    }
    return "undetermined";
}

/// Decision thresholds for classify().
struct ClassifyOptions {
    double window_fraction = 0.4;     ///< late fraction of the run to fit
    double ring_score_min = 0.5;      ///< ring: density dip at the mean
    double ring_growth_min = 0.1;     ///< ring: relative radius growth = diffusing
    double linear_r2_min = 0.99;      ///< linear pulse: collinearity
    double profile_residual_max = 0.05;  ///< linear pulse: profile constancy
    double circle_r2_min = 0.99;      ///< rotating pulse: circle fit
    double radius_drift_max = 0.02;   ///< rotating pulse: drift between halves
};

struct PulseReport {
    Regime regime = Regime::undetermined;
    double c_fit = 0.0;
    Point direction{1.0, 0.0};
    double delay_fit = std::numeric_limits<double>::quiet_NaN();  ///< NaN if undefined
    double radius_fit = 0.0;
    double omega_fit = 0.0;
    double r2 = 0.0;  ///< goodness of the accepted fit
    double profile_residual = std::numeric_limits<double>::quiet_NaN();
    double ring_score_last = std::numeric_limits<double>::quiet_NaN();
};

/// Fits every motion model on the late window and labels the regime: ring
/// first (density dip at the mean), then straight pulse, then rotating
/// pulse; anything else stays undetermined.
inline PulseReport classify(const ModelParams& params, const Trajectory& traj,
                            const ClassifyOptions& opt = {}) {
    const ModelParams prm = params.validated();
    const TimeWindow w = late_window(traj, opt.window_fraction);
    PulseReport rep;

    LinearFit lf;
    bool have_linear = false;
    try {
        lf = fit_linear_speed(traj, w);
        have_linear = true;
        rep.c_fit = lf.c_fit;
        rep.direction = lf.direction;
        rep.r2 = lf.r2;
    } catch (const std::exception&) {
    }

    try {
        rep.profile_residual =
            profile_constancy(traj.grid, traj.snapshots, rep.c_fit, rep.direction, w);
    } catch (const std::exception&) {
    }

    // Ring: a density dip at the mean outranks the motion fits, since a
    // slowly drifting ring is still a ring.
    std::vector<const Snapshot*> in_window;
    for (const Snapshot& s : traj.snapshots)
        if (s.t >= w.t0 && s.t <= w.t1) in_window.push_back(&s);
    if (!in_window.empty()) {
        try {
            rep.ring_score_last = ring_score(traj.grid, in_window.back()->h);
            if (rep.ring_score_last > opt.ring_score_min) {
                const double r_first = mean_radius(traj.grid, in_window.front()->h);
                const double r_last = mean_radius(traj.grid, in_window.back()->h);
                const bool growing =
                    r_first > 0.0 && (r_last - r_first) / r_first > opt.ring_growth_min;
                rep.regime = growing ? Regime::ring_diffusing : Regime::ring_stationary;
                return rep;
            }
        } catch (const std::exception&) {
        }
    }

    // Straight pulse: collinear mean motion with a constant profile.
    if (have_linear && lf.r2 >= opt.linear_r2_min &&
        std::isfinite(rep.profile_residual) &&
        rep.profile_residual < opt.profile_residual_max) {
        rep.regime = Regime::linear_pulse;
        try {
            rep.delay_fit = fit_delay(prm, traj, lf.c_fit, lf.direction, w);
        } catch (const std::exception&) {
        }
        return rep;
    }

    // Rotating pulse: circular mean motion with a stationary radius.
    if (traj.grid.n == 2) {
        try {
            const CircleFit cf = fit_circle(traj, w);
            rep.radius_fit = cf.radius;
            rep.omega_fit = cf.omega;
            const double mid = 0.5 * (w.t0 + w.t1);
            const CircleFit first = fit_circle(traj, {w.t0, mid});
            const CircleFit second = fit_circle(traj, {mid, w.t1});
            const double drift = std::fabs(second.radius - first.radius) / cf.radius;
            if (cf.r2 >= opt.circle_r2_min && drift < opt.radius_drift_max) {
                rep.regime = Regime::rotating_pulse;
                rep.r2 = cf.r2;
            }
        } catch (const std::exception&) {
        }
    }
    return rep;
}

}  // namespace redqueen
