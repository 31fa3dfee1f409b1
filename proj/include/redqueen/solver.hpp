#pragma once

/// Method-of-lines integrator for the coupled host / pathogen densities.
/// Space: second-order central differences with homogeneous Dirichlet ghost
/// values on a square box.  Time: classical RK4 with every nonlocal quantity
/// (masses and mean phenotypes) recomputed at each substage.  An optional
/// comoving window follows the host mean by exact integer-cell shifts so
/// traveling solutions can be integrated in a small box.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "redqueen/errors.hpp"
#include "redqueen/grid.hpp"
#include "redqueen/model.hpp"

namespace redqueen {

/// Mass below which a density is treated as extinct.
inline constexpr double kMassFloor = 1e-12;

struct SimOptions {
    double t_end = 20.0;
    double dt = 0.0;          ///< 0 selects the largest stable step
    int m = 129;              ///< grid points per axis
    double half_width = 0.0;  ///< 0 selects a box from the model length scales
    bool comoving = false;    ///< recenter the window on the host mean
    int sample_every = 1;     ///< record scalar observables every k-th step
    int snapshot_count = 9;   ///< full-field snapshots, evenly spaced in time
    Point x0{0.5, 0.5};       ///< initial host blob center
    Point y0{0.7, 0.0};       ///< initial pathogen blob center
    double init_std = 0.2;    ///< initial blob standard deviation
    double mass_H0 = 10.0;    ///< initial host mass
    double mass_P0 = 10.0;    ///< initial pathogen mass (0 = no pathogen)
};

struct NonlocalState {
    double H = 0.0;
    double P = 0.0;
    Point xbar{0.0, 0.0};  ///< host mean (window coordinates)
    Point ybar{0.0, 0.0};  ///< pathogen mean; meaningless when extinct
    bool pathogen_alive = false;
};

/// Masses and mean phenotypes of both densities.  Throws
/// degenerate_mass_error when the host is extinct (its mass divides the
/// pathogen growth rate); an extinct pathogen just switches the impact
/// term off.
inline NonlocalState compute_nonlocals(const Grid& g, const Field& h, const Field& p) {
    NonlocalState s;
    try {
        const FieldMoments mh = quadrature_moments(g, h, kMassFloor);
        s.H = mh.mass;
        s.xbar = mh.mean;
    } catch (const degenerate_mass_error&) {
        throw degenerate_mass_error(
            "host density has lost its mass; the pathogen equation is undefined");
    }
    try {
        const FieldMoments mp = quadrature_moments(g, p, kMassFloor);
        s.P = mp.mass;
        s.ybar = mp.mean;
        s.pathogen_alive = true;
    } catch (const degenerate_mass_error&) {
        s.P = 0.0;
        s.ybar = s.xbar;
        s.pathogen_alive = false;
    }
    return s;
}

/// Scratch buffers reused across right-hand-side evaluations.
struct PdeWorkspace {
    Field lap;
    std::vector<double> imp[2];   ///< impact exponential per axis
    std::vector<double> coh[2];   ///< host cohesion penalty per axis
    std::vector<double> conf[2];  ///< host confinement penalty per axis
    std::vector<double> pat[2];   ///< pathogen selection penalty per axis
    Field k1h, k1p, k2h, k2p, k3h, k3p, k4h, k4p, th, tp;
};

/// Time derivative of (h, p) on the window grid.  `offset` maps window to
/// physical coordinates (x = z + offset); only the absolute host confinement
/// term depends on it, every other coupling is relative.
inline void pde_rhs(const ModelParams& prm, const Grid& g, const Point& offset, const Field& h,
                    const Field& p, Field& dh, Field& dp, PdeWorkspace& ws) {
    const NonlocalState s = compute_nonlocals(g, h, p);
    const int m = g.m;
    const int naxes = g.n;
    for (int ax = 0; ax < naxes; ++ax) {
        ws.imp[ax].resize(m);
        ws.coh[ax].resize(m);
        ws.conf[ax].resize(m);
        ws.pat[ax].resize(m);
        for (int i = 0; i < m; ++i) {
            const double z = g.coord(i);
            const double di = z - s.ybar[ax];
            ws.imp[ax][i] = s.pathogen_alive ? std::exp(-prm.theta * di * di) : 0.0;
            const double dc = z - s.xbar[ax];
            ws.coh[ax][i] = prm.beta * prm.beta * dc * dc;
            const double xa = z + offset[ax];
            ws.conf[ax][i] = prm.alpha_H * prm.alpha_H * xa * xa;
            const double dp_ = z + prm.ell * prm.u[ax] - s.xbar[ax];
            ws.pat[ax][i] = prm.alpha_P * prm.alpha_P * dp_ * dp_;
        }
    }
    dh.resize(h.size());
    dp.resize(p.size());
    const double base_h = prm.R_H - prm.gamma_H * s.H;
    const double base_p = prm.R_P - prm.gamma_P * s.P / s.H;
    const double bite = prm.rho_max * s.P;

    laplacian(g, h, ws.lap);
    if (g.n == 1) {
        for (int i = 0; i < m; ++i) {
            const double rate =
                base_h - ws.conf[0][i] - ws.coh[0][i] - bite * ws.imp[0][i];
            dh[i] = prm.mu_H2 * ws.lap[i] + rate * h[i];
        }
    } else {
        for (int i = 0; i < m; ++i) {
            const double row = base_h - ws.conf[0][i] - ws.coh[0][i];
            for (int j = 0; j < m; ++j) {
                const std::size_t f = g.index(i, j);
                const double rate =
                    row - ws.conf[1][j] - ws.coh[1][j] - bite * ws.imp[0][i] * ws.imp[1][j];
                dh[f] = prm.mu_H2 * ws.lap[f] + rate * h[f];
            }
        }
    }

    laplacian(g, p, ws.lap);
    if (g.n == 1) {
        for (int i = 0; i < m; ++i)
            dp[i] = prm.mu_P2 * ws.lap[i] + (base_p - ws.pat[0][i]) * p[i];
    } else {
        for (int i = 0; i < m; ++i) {
            const double row = base_p - ws.pat[0][i];
            for (int j = 0; j < m; ++j) {
                const std::size_t f = g.index(i, j);
                dp[f] = prm.mu_P2 * ws.lap[f] + (row - ws.pat[1][j]) * p[f];
            }
        }
    }
}

/// Largest RK4 step the diffusion stencil tolerates, further capped so a
/// single step never advances the fastest reaction by more than a tenth of
/// its timescale.
inline double stable_dt(const ModelParams& prm, const Grid& g) {
    const double mu2 = std::max(prm.mu_H2, prm.mu_P2);
    double dt = 0.1 / std::max(prm.R_H, prm.R_P);
    if (mu2 > 0.0) dt = std::min(dt, 0.4 * g.dx() * g.dx() / (2.0 * g.n * mu2));
    return dt;
}

/// One RK4 step of both densities in place.  Rejects steps beyond the
/// stability bound and validates the updated fields (finiteness, positivity
/// up to roundoff).
inline void step_rk4_pde(const ModelParams& prm, const Grid& g, const Point& offset, Field& h,
                         Field& p, double dt, PdeWorkspace& ws) {
    if (!(dt > 0.0)) throw config_error("step_rk4_pde: time step must be positive");
    const double bound = stable_dt(prm, g);
    if (dt > bound * (1.0 + 1e-9))
        throw config_error("step_rk4_pde: time step " + std::to_string(dt) +
                           " exceeds the stability bound " + std::to_string(bound));
    const std::size_t N = g.size();
    auto blend = [&](Field& out, const Field& base, const Field& slope, double w) {
        out.resize(N);
        for (std::size_t f = 0; f < N; ++f) out[f] = base[f] + w * slope[f];
    };
    pde_rhs(prm, g, offset, h, p, ws.k1h, ws.k1p, ws);
    blend(ws.th, h, ws.k1h, 0.5 * dt);
    blend(ws.tp, p, ws.k1p, 0.5 * dt);
    pde_rhs(prm, g, offset, ws.th, ws.tp, ws.k2h, ws.k2p, ws);
    blend(ws.th, h, ws.k2h, 0.5 * dt);
    blend(ws.tp, p, ws.k2p, 0.5 * dt);
    pde_rhs(prm, g, offset, ws.th, ws.tp, ws.k3h, ws.k3p, ws);
    blend(ws.th, h, ws.k3h, dt);
    blend(ws.tp, p, ws.k3p, dt);
    pde_rhs(prm, g, offset, ws.th, ws.tp, ws.k4h, ws.k4p, ws);
    const double w = dt / 6.0;
    for (std::size_t f = 0; f < N; ++f) {
        h[f] += w * (ws.k1h[f] + 2.0 * ws.k2h[f] + 2.0 * ws.k3h[f] + ws.k4h[f]);
        p[f] += w * (ws.k1p[f] + 2.0 * ws.k2p[f] + 2.0 * ws.k3p[f] + ws.k4p[f]);
    }
    validate_field(g, h, "h");
    validate_field(g, p, "p");
}

struct TrajectorySample {
    double t = 0.0;
    double H = 0.0;
    double P = 0.0;
    Point xbar{0.0, 0.0};  ///< physical coordinates
    Point ybar{0.0, 0.0};  ///< NaN when the pathogen is extinct
};

struct Snapshot {
    double t = 0.0;
    Point offset{0.0, 0.0};  ///< physical position of window coordinate 0
    Field h, p;
};

struct Trajectory {
    Grid grid;
    double dt = 0.0;
    std::vector<TrajectorySample> samples;
    std::vector<Snapshot> snapshots;
};

namespace detail {

/// Box half-width from the model's analytic length scales: eight standard
/// deviations of the widest stationary Gaussian, grown to contain the
/// initial blobs (relative to the window center) with margin.
inline double auto_half_width(const ModelParams& prm, const SimOptions& opt,
                              const Point& center) {
    double sd = 0.0;
    if (prm.beta > 0.0) sd = std::max(sd, std::sqrt(prm.mu_H() / prm.beta));
    if (prm.alpha_H > 0.0) sd = std::max(sd, std::sqrt(prm.mu_H() / prm.alpha_H));
    if (prm.alpha_P > 0.0) sd = std::max(sd, std::sqrt(prm.mu_P() / prm.alpha_P));
    double hw = 8.0 * sd;
    const double rx = std::sqrt(norm2(sub(opt.x0, center), prm.n));
    const double ry = std::sqrt(norm2(sub(opt.y0, center), prm.n));
    hw = std::max(hw, std::max(rx, ry) + 6.0 * opt.init_std + std::fabs(prm.ell));
    return std::max(hw, 3.0);
}

}  // namespace detail

/// Integrates the model from Gaussian initial blobs and records scalar
/// observables every few steps plus a handful of full-field snapshots.
inline Trajectory simulate(const ModelParams& params, const SimOptions& opt) {
    const ModelParams prm = params.validated();
    if (!(opt.t_end > 0.0)) throw config_error("simulate: t_end must be positive");
    if (!(opt.init_std > 0.0)) throw config_error("simulate: init_std must be positive");
    if (!(opt.mass_H0 > 0.0)) throw config_error("simulate: host must start with positive mass");
    if (opt.mass_P0 < 0.0) throw config_error("simulate: pathogen mass must be nonnegative");
    if (opt.sample_every < 1) throw config_error("simulate: sample_every must be >= 1");
    if (opt.snapshot_count < 2) throw config_error("simulate: need at least 2 snapshots");

    Point x0 = opt.x0, y0 = opt.y0;
    if (prm.n == 1) x0[1] = y0[1] = 0.0;
    Point offset{0.0, 0.0};
    if (opt.comoving) offset = x0;  // start the window on the host blob

    const double hw = opt.half_width > 0.0 ? opt.half_width
                                           : detail::auto_half_width(prm, opt, offset);
    const Grid g(prm.n, -hw, hw, opt.m);

    // Initial Gaussian blobs with prescribed masses (window coordinates).
    const double var = opt.init_std * opt.init_std;
    const double norm = std::pow(2.0 * M_PI * var, -0.5 * prm.n);
    Field h(g.size()), p(g.size());
    for (std::size_t f = 0; f < g.size(); ++f) {
        const Point z = g.point(f);
        h[f] = opt.mass_H0 * norm *
               std::exp(-norm2(sub(add(z, offset), x0), prm.n) / (2.0 * var));
        p[f] = opt.mass_P0 * norm *
               std::exp(-norm2(sub(add(z, offset), y0), prm.n) / (2.0 * var));
    }

    double dt = stable_dt(prm, g);
    if (opt.dt > 0.0) {
        if (opt.dt > dt * (1.0 + 1e-9))
            throw config_error("simulate: requested dt " + std::to_string(opt.dt) +
                               " exceeds the stability bound " + std::to_string(dt));
        dt = opt.dt;
    }
    const long steps = static_cast<long>(std::ceil(opt.t_end / dt - 1e-12));
    if (steps > 20'000'000L) throw config_error("simulate: step count over the safety limit");
    dt = opt.t_end / static_cast<double>(steps);

    Trajectory traj{g, dt, {}, {}};
    const long snap_every = std::max(1L, steps / (opt.snapshot_count - 1));

    auto record_sample = [&](double t) {
        const NonlocalState s = compute_nonlocals(g, h, p);
        TrajectorySample smp;
        smp.t = t;
        smp.H = s.H;
        smp.P = s.P;
        smp.xbar = add(s.xbar, offset);
        smp.ybar = s.pathogen_alive
                       ? add(s.ybar, offset)
                       : Point{std::nan(""), std::nan("")};
        traj.samples.push_back(smp);
    };
    auto record_snapshot = [&](double t) { traj.snapshots.push_back({t, offset, h, p}); };

    record_sample(0.0);
    record_snapshot(0.0);

    PdeWorkspace ws;
    Field shifted;
    for (long k = 1; k <= steps; ++k) {
        step_rk4_pde(prm, g, offset, h, p, dt, ws);
        if (opt.comoving) {
            const NonlocalState s = compute_nonlocals(g, h, p);
            const std::array<int, 2> cells{
                static_cast<int>(std::lround(s.xbar[0] / g.dx())),
                g.n == 2 ? static_cast<int>(std::lround(s.xbar[1] / g.dx())) : 0};
            if (cells[0] != 0 || cells[1] != 0) {
                shift_field(g, h, {-cells[0], -cells[1]}, shifted);
                h.swap(shifted);
                shift_field(g, p, {-cells[0], -cells[1]}, shifted);
                p.swap(shifted);
                offset[0] += cells[0] * g.dx();
                offset[1] += cells[1] * g.dx();
            }
        }
        const double t = dt * static_cast<double>(k);
        if (k % opt.sample_every == 0 || k == steps) record_sample(t);
        if (k % snap_every == 0 || k == steps) record_snapshot(t);
    }
    return traj;
}

}  // namespace redqueen
