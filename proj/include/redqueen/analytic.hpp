#pragma once

/// Closed-form special solutions of the model and the numerical construction
/// of the stationary state.
///
/// Stationary case (no cohesion term, beta = 0): the pathogen profile is an
/// explicit Gaussian, the host/pathogen masses obey a linear relation, and
/// the host profile is the principal eigenfunction of a Schrodinger operator
/// whose eigenvalue must vanish; the pathogen pressure P is found by
/// bracketed secant iteration on that eigenvalue.
///
/// Pursuit case (cohesion beta > 0, no host confinement): the pathogen
/// profile trailing a host pulse of speed c is a drift-times-Gaussian that
/// collapses, by completing the square, to one fixed Gaussian independent
/// of c; the pathogen mass then determines the admissible speed.

#include <cmath>
#include <string>

#include "redqueen/eigensolve.hpp"
#include "redqueen/errors.hpp"
#include "redqueen/grid.hpp"
#include "redqueen/model.hpp"

namespace redqueen {

/// A positive stationary state exists iff both populations can sustain
/// themselves against their stabilizing selection.
inline bool stationary_exists(const ModelParams& prm) {
    return prm.R_P > prm.n * prm.mu_P() * prm.alpha_P &&
           prm.R_H > prm.n * prm.mu_H() * prm.alpha_H;
}

/// Stationary pathogen profile (unit mass, centered on the host mean).
inline double psi_stationary_at(const ModelParams& prm, const Point& y) {
    return std::pow(prm.alpha_P / (2.0 * M_PI * prm.mu_P()), 0.5 * prm.n) *
           std::exp(-prm.alpha_P * norm2(y, prm.n) / (2.0 * prm.mu_P()));
}

/// Host mass enforced by the pathogen equation at pressure P, given the
/// pathogen decay rate nu (= n mu_P alpha_P in the continuum).
inline double host_mass_for(const ModelParams& prm, double P, double nu) {
    if (!(prm.R_P > nu))
        throw infeasible_error("host_mass_for: pathogen decay rate exceeds its growth rate");
    return prm.gamma_P * P / (prm.R_P - nu);
}

/// Potential of the host eigenproblem at pathogen pressure P: growth minus
/// competition at mass H, confinement, and the pathogen impact well.
inline Field host_potential(const ModelParams& prm, const Grid& g, double P, double H) {
    Field V(g.size());
    for (std::size_t f = 0; f < g.size(); ++f) {
        const Point x = g.point(f);
        V[f] = prm.R_H - prm.gamma_H * H - prm.alpha_H * prm.alpha_H * norm2(x, prm.n) -
               P * prm.rho_max * std::exp(-prm.theta * norm2(x, prm.n));
    }
    return V;
}

struct StationaryOptions {
    int m = 129;
    double half_width = 0.0;  ///< 0 = automatic from the model length scales
    double lambda_tol = 1e-8;
    double eigen_tol = 1e-6;
    /// Use the grid's own pathogen ground state (eigenvalue and profile) in
    /// the mass relation, so the result is the exact fixed point of the
    /// semi-discrete dynamics rather than of the continuum equations.
    bool discrete_consistent = false;
};

struct StationaryState {
    Grid grid;
    double P = 0.0;       ///< pathogen mass
    double H = 0.0;       ///< host mass
    double lambda = 0.0;  ///< residual host eigenvalue at P (within lambda_tol of 0)
    double nu = 0.0;      ///< pathogen decay rate used in the mass relation
    Field phi;            ///< host profile, unit quadrature mass
    Field psi;            ///< pathogen profile, unit (quadrature) mass
};

namespace detail {

inline double stationary_half_width(const ModelParams& prm) {
    double sd = 0.0;
    if (prm.alpha_H > 0.0) sd = std::max(sd, std::sqrt(prm.mu_H() / prm.alpha_H));
    if (prm.alpha_P > 0.0) sd = std::max(sd, std::sqrt(prm.mu_P() / prm.alpha_P));
    if (sd == 0.0)
        throw config_error(
            "solve_stationary: no confinement scale; specify half_width explicitly");
    return std::max(8.0 * sd, 3.0);
}

}  // namespace detail

/// Constructs the stationary state on a grid.  Requires the static form of
/// the model (beta = 0) and the existence condition; throws infeasible_error
/// otherwise.
inline StationaryState solve_stationary(const ModelParams& params,
                                        const StationaryOptions& opt = {}) {
    const ModelParams prm = params.validated();
    if (prm.beta != 0.0)
        throw config_error(
            "solve_stationary: the stationary construction applies to the static system "
            "(beta = 0)");
    if (!stationary_exists(prm))
        throw infeasible_error(
            "solve_stationary: no stationary state (growth rates do not dominate selection)");
    const double hw = opt.half_width > 0.0 ? opt.half_width : detail::stationary_half_width(prm);
    const Grid g(prm.n, -hw, hw, opt.m);

    StationaryState st{g, 0.0, 0.0, 0.0, 0.0, {}, {}};

    // Pathogen side: decay rate and profile, continuum or grid-consistent.
    if (opt.discrete_consistent) {
        Field Vp(g.size());
        for (std::size_t f = 0; f < g.size(); ++f)
            Vp[f] = -prm.alpha_P * prm.alpha_P * norm2(g.point(f), prm.n);
        EigenOptions eo;
        eo.tol = opt.eigen_tol;
        EigenResult ep = principal_eigen(g, prm.mu_P2, Vp, eo);
        st.nu = -ep.lambda;
        st.psi = std::move(ep.v);
        const double mass = quadrature_mass(g, st.psi);
        for (double& x : st.psi) x /= mass;
    } else {
        st.nu = prm.n * prm.mu_P() * prm.alpha_P;
        st.psi.resize(g.size());
        for (std::size_t f = 0; f < g.size(); ++f)
            st.psi[f] = psi_stationary_at(prm, g.point(f));
    }
    if (!(prm.R_P > st.nu))
        throw infeasible_error("solve_stationary: pathogen cannot sustain itself on this grid");

    // Host side: bisect the principal eigenvalue to zero in the pressure P.
    Field warm;
    auto lambda_at = [&](double P) {
        EigenOptions eo;
        eo.tol = opt.eigen_tol;
        if (!warm.empty()) eo.warm_start = &warm;
        const Field V = host_potential(prm, g, P, host_mass_for(prm, P, st.nu));
        EigenResult er = principal_eigen(g, prm.mu_H2, V, eo);
        warm = std::move(er.v);
        return er.lambda;
    };

    double a = 0.0, fa = lambda_at(0.0);
    if (!(fa > 0.0))
        throw infeasible_error("solve_stationary: host growth does not exceed its confinement");
    double b = 1.0, fb = lambda_at(b);
    int doublings = 0;
    while (fb > 0.0) {
        a = b;
        fa = fb;
        b *= 2.0;
        fb = lambda_at(b);
        if (++doublings > 60)
            throw numeric_error("solve_stationary: failed to bracket the critical pressure");
    }

    // Illinois-damped false position on [a, b] with fa > 0 > fb.
    double P = b, fP = fb;
    int side = 0;
    for (int it = 0; it < 200; ++it) {
        P = (a * fb - b * fa) / (fb - fa);
        fP = lambda_at(P);
        if (std::fabs(fP) < opt.lambda_tol) break;
        if (fP > 0.0) {
            a = P;
            fa = fP;
            if (side == 1) fb *= 0.5;
            side = 1;
        } else {
            b = P;
            fb = fP;
            if (side == -1) fa *= 0.5;
            side = -1;
        }
        if (it == 199)
            throw numeric_error("solve_stationary: pressure iteration did not converge");
    }

    st.P = P;
    st.H = host_mass_for(prm, P, st.nu);
    st.lambda = fP;
    st.phi = std::move(warm);
    const double mass = quadrature_mass(g, st.phi);
    for (double& x : st.phi) x /= mass;
    return st;
}

// ---------------------------------------------------------------------------
// Pursuit (traveling pulse) closed forms.

/// Time lag by which the pathogen mean trails the host mean, divided by the
/// speed: ybar(t) = xbar(t - tau) - ell u.
inline double pursuit_delay(const ModelParams& prm) {
    if (!(prm.alpha_P > 0.0))
        throw config_error("pursuit_delay: requires pathogen stabilizing selection");
    return 1.0 / (2.0 * prm.mu_P() * prm.alpha_P);
}

/// Pathogen pulse profile in the frame of the host mean (w = y - xbar).
/// Independent of the speed c: the drift form collapses to this Gaussian.
inline double pursuit_psi_at(const ModelParams& prm, const Point& w) {
    const Point centered = add(w, scale(prm.u, prm.ell));
    return std::pow(prm.alpha_P / (2.0 * M_PI * prm.mu_P()), 0.5 * prm.n) *
           std::exp(-prm.alpha_P * norm2(centered, prm.n) / (2.0 * prm.mu_P()));
}

/// Normalization constant of the drift-times-Gaussian form of the pathogen
/// pulse at speed c.
inline double pursuit_normalization(const ModelParams& prm, double c) {
    const double tau = pursuit_delay(prm);
    const double a = c * tau - prm.ell;
    const double a2_minus_b2 = a * a - prm.ell * prm.ell;  // = c tau (c tau - 2 ell)
    return std::pow(prm.alpha_P / (2.0 * M_PI * prm.mu_P()), 0.5 * prm.n) *
           std::exp(prm.alpha_P * a2_minus_b2 / (2.0 * prm.mu_P()));
}

/// Drift-times-Gaussian form of the pathogen pulse profile; equal to
/// pursuit_psi_at for every speed (completing the square).
inline double pursuit_psi_drift_at(const ModelParams& prm, double c, const Point& w) {
    const double tau = pursuit_delay(prm);
    const Point center = scale(prm.u, c * tau - prm.ell);
    const Point d = sub(w, center);
    return pursuit_normalization(prm, c) *
           std::exp(-c * dot(w, prm.u, prm.n) / (2.0 * prm.mu_P2)) *
           std::exp(-prm.alpha_P * norm2(d, prm.n) / (2.0 * prm.mu_P()));
}

/// Pathogen mass consistent with a pulse of speed c at host mass H.  A speed
/// too large for the pathogen to keep up leaves no admissible mass.
inline double pulse_pathogen_mass(const ModelParams& prm, double c, double H) {
    const double rate = prm.R_P - prm.n * prm.mu_P() * prm.alpha_P -
                        c * c / (4.0 * prm.mu_P2);
    if (!(rate > 0.0))
        throw infeasible_error("pulse_pathogen_mass: speed too large for a viable pathogen");
    return H * rate / prm.gamma_P;
}

struct UnperturbedHost {
    double c = 0.0;  ///< pulse speed without pathogen impact
    double H = 0.0;  ///< host mass without pathogen impact
};

/// Host pulse in the impact-free limit: a standing Gaussian determined by
/// cohesion alone.
inline UnperturbedHost unperturbed_host(const ModelParams& prm) {
    if (!(prm.beta > 0.0))
        throw config_error("unperturbed_host: requires a cohesion term (beta > 0)");
    const double H0 = (prm.R_H - prm.n * prm.mu_H() * prm.beta) / prm.gamma_H;
    if (!(H0 > 0.0))
        throw infeasible_error("unperturbed_host: cohesion selection exceeds host growth");
    return {0.0, H0};
}

/// Impact-free host pulse profile (unit mass, centered on the host mean).
inline double unperturbed_host_profile_at(const ModelParams& prm, const Point& z) {
    return std::pow(prm.beta / (2.0 * M_PI * prm.mu_H()), 0.5 * prm.n) *
           std::exp(-prm.beta * norm2(z, prm.n) / (2.0 * prm.mu_H()));
}

/// Hypotheses of the small-impact pulse construction.
struct PulseConditions {
    bool pathogen_viable = false;    ///< R_P > n mu_P alpha_P
    bool host_viable = false;        ///< R_H > n mu_H beta
    bool cohesion_dominates = false; ///< beta large against the impact width
    bool all() const { return pathogen_viable && host_viable && cohesion_dominates; }
};

inline PulseConditions pulse_conditions(const ModelParams& prm) {
    PulseConditions c;
    c.pathogen_viable = prm.R_P > prm.n * prm.mu_P() * prm.alpha_P;
    c.host_viable = prm.R_H > prm.n * prm.mu_H() * prm.beta;
    const double coef =
        std::max(3.0 * std::pow(2.0, prm.n - 2) - 1.0, 1.0 / (std::sqrt(5.0) - 2.0));
    c.cohesion_dominates = prm.beta > coef * prm.mu_H() * prm.theta;
    return c;
}

}  // namespace redqueen
