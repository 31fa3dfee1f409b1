#pragma once
/// @file model.hpp
/// Parameter set and pointwise growth/interaction rates for the nonlocal
/// host–pathogen model in phenotype space, plus the reduced two-species ODE
/// obtained by ignoring phenotype structure.
///
/// Host density h(t,x) and pathogen density p(t,y) live on R^n (n = 1 or 2).
/// Writing H, P for the total masses and xbar, ybar for the mean phenotypes,
///   dh/dt = mu_H^2 lap h + (R_H - gamma_H H - alpha_H^2|x|^2
///           - beta^2|x - xbar|^2 - P rho_max e^{-theta|x - ybar|^2}) h
///   dp/dt = mu_P^2 lap p + (R_P - gamma_P P/H - alpha_P^2|y + l u - xbar|^2) p
/// The pathogen optimum trails the host mean by the lag l along direction u.

#include <array>
#include <cmath>
#include <string>

#include "redqueen/errors.hpp"
#include "redqueen/numerics.hpp"

namespace redqueen {

/// Phenotype-space point; for n = 1 only the first component is used and the
/// second is kept at zero.
using Point = std::array<double, 2>;

inline double dot(const Point& a, const Point& b, int n) {
    double s = a[0] * b[0];
    if (n == 2) s += a[1] * b[1];
    return s;
}

inline double norm2(const Point& a, int n) { return dot(a, a, n); }

inline Point sub(const Point& a, const Point& b) { return {a[0] - b[0], a[1] - b[1]}; }
inline Point add(const Point& a, const Point& b) { return {a[0] + b[0], a[1] + b[1]}; }
inline Point scale(const Point& a, double s) { return {a[0] * s, a[1] * s}; }

// ============================ parameter set =============================

/// Model parameters.  Diffusivities are stored as squares (mu_H2 = mu_H^2),
/// matching how they enter the equations; mu_H()/mu_P() give the roots.
/// Defaults are the baseline two-dimensional configuration used throughout
/// the bundled configs.
struct ModelParams {
    int n = 2;            ///< phenotype-space dimension (1 or 2)
    double mu_H2 = 0.1;   ///< host mutation diffusivity (squared scale)
    double mu_P2 = 0.1;   ///< pathogen mutation diffusivity (squared scale)
    double R_H = 4.0;     ///< host maximal growth rate
    double R_P = 1.0;     ///< pathogen maximal growth rate
    double gamma_H = 1.0; ///< host intraspecific competition
    double gamma_P = 0.01;///< pathogen competition (per unit host)
    double rho_max = 0.1; ///< peak pathogen-induced host mortality
    double theta = 1.0;   ///< width of the pathogen impact kernel
    double alpha_H = 0.0; ///< host stabilizing selection toward 0
    double alpha_P = 1.0; ///< pathogen stabilizing selection toward its optimum
    double beta = 1.0;    ///< host selection toward its own mean (cohesion)
    double ell = 0.0;     ///< phenotypic lag of the pathogen optimum
    Point u = {1.0, 0.0}; ///< unit direction of the lag

    double mu_H() const { return std::sqrt(mu_H2); }
    double mu_P() const { return std::sqrt(mu_P2); }

    /// Validates invariants and returns a copy with u normalized.
    /// Throws config_error naming the offending field.
    ModelParams validated() const {
        ModelParams p = *this;
        if (p.n != 1 && p.n != 2) throw config_error("ModelParams: n must be 1 or 2");
        auto nonneg = [](double v, const char* name) {
            if (!(v >= 0.0) || !std::isfinite(v))
                throw config_error(std::string("ModelParams: ") + name + " must be finite and >= 0");
        };
        if (!(p.mu_H2 > 0.0)) throw config_error("ModelParams: mu_H2 must be > 0");
        if (!(p.mu_P2 > 0.0)) throw config_error("ModelParams: mu_P2 must be > 0");
        nonneg(p.R_H, "R_H"); nonneg(p.R_P, "R_P");
        nonneg(p.gamma_H, "gamma_H"); nonneg(p.gamma_P, "gamma_P");
        nonneg(p.rho_max, "rho_max"); nonneg(p.theta, "theta");
        nonneg(p.alpha_H, "alpha_H"); nonneg(p.alpha_P, "alpha_P");
        nonneg(p.beta, "beta");
        if (!std::isfinite(p.ell)) throw config_error("ModelParams: ell must be finite");
        if (p.n == 1) p.u[1] = 0.0;
        const double un = std::sqrt(norm2(p.u, p.n));
        if (!(un > 0.0)) throw config_error("ModelParams: u must be a nonzero direction");
        p.u = scale(p.u, 1.0 / un);
        return p;
    }
};

// ========================== pointwise rates =============================

/// Host per-capita growth from selection alone (no competition, no pathogen):
/// R_H - alpha_H^2 |x|^2 - beta^2 |x - xbar|^2.
inline double fitness_host(const ModelParams& p, const Point& x, const Point& xbar) {
    return p.R_H - p.alpha_H * p.alpha_H * norm2(x, p.n)
               - p.beta * p.beta * norm2(sub(x, xbar), p.n);
}

/// Pathogen-induced host mortality per unit pathogen mass:
/// rho_max e^{-theta |x - ybar|^2}.
inline double impact(const ModelParams& p, const Point& x, const Point& ybar) {
    return p.rho_max * std::exp(-p.theta * norm2(sub(x, ybar), p.n));
}

/// Pathogen per-capita growth from selection toward the lagged host mean:
/// R_P - alpha_P^2 |y + l u - xbar|^2.
inline double fitness_pathogen(const ModelParams& p, const Point& y, const Point& xbar) {
    const Point shifted = add(y, scale(p.u, p.ell));
    return p.R_P - p.alpha_P * p.alpha_P * norm2(sub(shifted, xbar), p.n);
}

// =========================== reduced ODE ================================

/// Total masses of the two populations in the phenotype-blind reduction.
struct OdeState {
    double H = 1.0;
    double P = 1.0;
};

/// Right-hand side of the mass-only reduction
///   H' = H (R_H - gamma_H H - rho_max P)
///   P' = P (R_P - gamma_P P / H).
/// Throws degenerate_mass_error if H <= 0 (the P/H term is undefined).
inline OdeState ode_rhs(const ModelParams& p, const OdeState& s) {
    if (!(s.H > 0.0))
        throw degenerate_mass_error("ode_rhs: host mass must be positive, got H = " +
                                    std::to_string(s.H));
    return {s.H * (p.R_H - p.gamma_H * s.H - p.rho_max * s.P),
            s.P * (p.R_P - p.gamma_P * s.P / s.H)};
}

/// Coexistence equilibrium of the reduced ODE (valid when all rates > 0):
/// H = R_H gamma_P / (gamma_H gamma_P + rho_max R_P),
/// P = R_H R_P / (gamma_H gamma_P + rho_max R_P).
inline OdeState ode_equilibrium(const ModelParams& p) {
    const double denom = p.gamma_H * p.gamma_P + p.rho_max * p.R_P;
    if (!(denom > 0.0))
        throw infeasible_error("ode_equilibrium: gamma_H gamma_P + rho_max R_P must be > 0");
    return {p.R_H * p.gamma_P / denom, p.R_H * p.R_P / denom};
}

/// Integrates the reduced ODE with the shared RK4 stepper.
inline OdeState ode_integrate(const ModelParams& p, OdeState s0, double t_end, double dt) {
    if (!(dt > 0.0) || !(t_end >= 0.0))
        throw config_error("ode_integrate: need dt > 0 and t_end >= 0");
    std::vector<double> y = {s0.H, s0.P};
    Rk4Workspace ws;
    auto rhs = [&p](const std::vector<double>& v, std::vector<double>& dv) {
        const OdeState d = ode_rhs(p, {v[0], v[1]});
        dv[0] = d.H;
        dv[1] = d.P;
    };
    const long steps = static_cast<long>(std::ceil(t_end / dt - 1e-12));
    for (long i = 0; i < steps; ++i) {
        const double h = std::min(dt, t_end - static_cast<double>(i) * dt);
        rk4_step(y, h, rhs, ws);
    }
    return {y[0], y[1]};
}

} // namespace redqueen
