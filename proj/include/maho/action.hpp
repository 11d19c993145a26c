#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "maho/calibration.hpp"
#include "maho/classical.hpp"
#include "maho/common.hpp"
#include "maho/model.hpp"

namespace maho {

/// Time-dependent coefficients of the classical action between fixed
/// endpoints. The action and the endpoint velocities are rational in these:
///
///   S = (m / 2D) { a1 (x1^2 + x2^2) + a2 (y1^2 + y2^2)
///                  - 2 b1 x1 x2 - 2 b2 y1 y2
///                  + k c1 (x1 y2 - x2 y1) + c2 (x2 y2 - x1 y1) }
///
/// with cross factor k = calibration::kActionCrossFactor. D is the
/// fluctuation determinant whose zeros are the caustic times.
///
/// In the decoupled regime (omega0 ~ 0) every entry carries a common factor
/// Omega_plus * Omega_minus that is singular to evaluate when the two mode
/// frequencies coincide. That factor cancels from every downstream ratio
/// (action, velocities, amplitude), so the decoupled branch stores the
/// reduced values with the factor removed; D then equals
/// sin(omega1 T) sin(omega2 T).
struct ActionCoefficients {
    double a1 = 0, a2 = 0;
    double b1 = 0, b2 = 0;
    double c1 = 0, c2 = 0;
    double f1 = 0, f2 = 0;
    double D = 0;
    double T = 0;
};

/// Relative scale for treating D(T) as zero (conjugate endpoints).
inline constexpr double kCausticRelTolerance = 1e-9;

/// Regime-aware absolute threshold on |D(T)|.
inline double caustic_threshold(const DerivedFrequencies& d) {
    if (d.decoupled) return kCausticRelTolerance;
    const double w = d.omega1 + d.omega2;
    return kCausticRelTolerance * w * w * std::max(1.0, d.Omega_minus / d.Omega_plus);
}

namespace detail {

/// (Omega_plus / Omega_minus) * sin^2(Omega_minus T / 2), stabilized against
/// Omega_minus -> 0 where the ratio is finite: it tends to
/// Omega_plus * Omega_minus * T^2 / 4.
inline double ratio_pm_sin2(const DerivedFrequencies& d, double T) {
    const double half = 0.5 * d.Omega_minus * T;
    if (std::abs(half) < 0.5e-4) {
        const double s = sinc(half);
        return 0.25 * d.Omega_plus * d.Omega_minus * T * T * s * s;
    }
    const double s = std::sin(half);
    return d.Omega_plus / d.Omega_minus * s * s;
}

} // namespace detail

/// Evaluate the action coefficients at elapsed time T > 0.
inline ActionCoefficients coefficients(const DerivedFrequencies& d, double T) {
    if (!(T > 0.0) || !std::isfinite(T))
        throw std::invalid_argument("coefficients: T must be positive and finite");
    ActionCoefficients ac;
    ac.T = T;
    const double w1 = d.omega1, w2 = d.omega2, w0 = d.omega0;
    if (d.decoupled) {
        const double s1 = std::sin(w1 * T), c1 = std::cos(w1 * T);
        const double s2 = std::sin(w2 * T), c2 = std::cos(w2 * T);
        ac.a1 = w1 * c1 * s2;
        ac.a2 = w2 * c2 * s1;
        ac.b1 = w1 * s2;
        ac.b2 = w2 * s1;
        ac.D = s1 * s2;
        return ac;
    }
    const double Op = d.Omega_plus, Om = d.Omega_minus;
    const double Sp = std::sin(0.5 * Op * T), Cp = std::cos(0.5 * Op * T);
    const double Sm = std::sin(0.5 * Om * T), Cm = std::cos(0.5 * Om * T);
    const double wsum = w1 + w2, wdif = w1 - w2;
    const double pm = detail::ratio_pm_sin2(d, T);   // (Op/Om) Sm^2
    const double mp = Om / Op * Sp * Sp;             // (Om/Op) Sp^2
    const double sinOpT = 2.0 * Sp * Cp;
    const double sinOmT = 2.0 * Sm * Cm;
    ac.a1 = 0.5 * w1 * (Om * wsum * sinOpT - Op * wdif * sinOmT);
    ac.a2 = 0.5 * w2 * (Om * wsum * sinOpT + Op * wdif * sinOmT);
    ac.b1 = w1 * (Om * wsum * Sp * Cm - Op * wdif * Cp * Sm);
    ac.b2 = w2 * (Om * wsum * Sp * Cm + Op * wdif * Cp * Sm);
    ac.c1 = w0 * w1 * w2 * Sp * Sm;
    ac.c2 = w0 * wsum * wdif * (pm - mp);
    ac.f1 = w0 * (w2 * wdif * pm + w2 * wsum * mp);
    ac.f2 = w0 * (w1 * wdif * pm - w1 * wsum * mp);
    ac.D = wsum * wsum * mp - wdif * wdif * pm;
    return ac;
}

/// Velocities of the classical path at both endpoints, from the coefficient
/// representation. Throws CausticError when |D(T)| is below threshold.
inline EndpointVelocities endpoint_velocities(const Endpoints& ep,
                                              const DerivedFrequencies& d) {
    validate(ep);
    const ActionCoefficients ac = coefficients(d, ep.T);
    const double thr = caustic_threshold(d);
    if (std::abs(ac.D) < thr) throw CausticError(ep.T, ac.D, thr);
    const double iD = 1.0 / ac.D;
    EndpointVelocities v;
    v.vx1 = iD * (-ac.a1 * ep.x1 + ac.b1 * ep.x2 - 2.0 * ac.c1 * ep.y2 + ac.f1 * ep.y1);
    v.vx2 = iD * (-ac.b1 * ep.x1 + ac.a1 * ep.x2 - 2.0 * ac.c1 * ep.y1 + ac.f1 * ep.y2);
    v.vy1 = iD * (-ac.a2 * ep.y1 + ac.b2 * ep.y2 + 2.0 * ac.c1 * ep.x2 + ac.f2 * ep.x1);
    v.vy2 = iD * (-ac.b2 * ep.y1 + ac.a2 * ep.y2 + 2.0 * ac.c1 * ep.x1 + ac.f2 * ep.x2);
    return v;
}

/// Classical action from the closed coefficient form.
inline double action_closed(const Endpoints& ep, const OscillatorConfig& cfg,
                            const DerivedFrequencies& d,
                            double cross_factor = calibration::kActionCrossFactor) {
    validate(ep);
    const ActionCoefficients ac = coefficients(d, ep.T);
    const double thr = caustic_threshold(d);
    if (std::abs(ac.D) < thr) throw CausticError(ep.T, ac.D, thr);
    const double quad = ac.a1 * (ep.x1 * ep.x1 + ep.x2 * ep.x2) +
                        ac.a2 * (ep.y1 * ep.y1 + ep.y2 * ep.y2) -
                        2.0 * ac.b1 * ep.x1 * ep.x2 - 2.0 * ac.b2 * ep.y1 * ep.y2 +
                        cross_factor * ac.c1 * (ep.x1 * ep.y2 - ep.x2 * ep.y1) +
                        ac.c2 * (ep.x2 * ep.y2 - ep.x1 * ep.y1);
    return 0.5 * cfg.m / ac.D * quad;
}

/// Classical action from boundary kinematics. For a quadratic Lagrangian the
/// on-shell action reduces to (m/2) [x xdot + y ydot] evaluated between the
/// endpoints; the magnetic contribution cancels in that pairing. Serves as an
/// independent route for cross-checking action_closed.
inline double action_boundary(const Endpoints& ep, const OscillatorConfig& cfg,
                              const DerivedFrequencies& d) {
    const EndpointVelocities v = endpoint_velocities(ep, d);
    return 0.5 * cfg.m *
           (ep.x2 * v.vx2 + ep.y2 * v.vy2 - ep.x1 * v.vx1 - ep.y1 * v.vy1);
}

/// Conserved energy along a classical trajectory sample.
inline double energy(const PhasePoint& p, const OscillatorConfig& cfg) {
    return 0.5 * cfg.m *
           (p.vx * p.vx + p.vy * p.vy + cfg.omega1 * cfg.omega1 * p.x * p.x +
            cfg.omega2 * cfg.omega2 * p.y * p.y);
}

/// Lagrangian along a classical trajectory sample.
inline double lagrangian(const PhasePoint& p, const OscillatorConfig& cfg) {
    return 0.5 * cfg.m *
           (p.vx * p.vx + p.vy * p.vy - cfg.omega1 * cfg.omega1 * p.x * p.x -
            cfg.omega2 * cfg.omega2 * p.y * p.y +
            cfg.omega0 * (p.x * p.vy - p.y * p.vx));
}

/// All caustic times in (0, t_max]. D factors as P * Q with
///   P = alpha sin(Omega_plus t / 2) - beta sin(Omega_minus t / 2)
///   Q = alpha sin(Omega_plus t / 2) + beta sin(Omega_minus t / 2)
/// where alpha = (w1 + w2) sqrt(Om/Op) and beta = |w1 - w2| sqrt(Op/Om).
/// Root-finding on P and Q separately keeps double roots of D (isotropic
/// case) visible as simple roots of each factor.
inline std::vector<double> caustics(const DerivedFrequencies& d, double t_max) {
    if (!(t_max > 0.0) || !std::isfinite(t_max))
        throw std::invalid_argument("caustics: t_max must be positive and finite");
    std::vector<double> roots;
    if (d.decoupled) {
        for (int k = 1; k * std::numbers::pi / d.omega1 <= t_max * (1 + 1e-15); ++k)
            roots.push_back(k * std::numbers::pi / d.omega1);
        for (int k = 1; k * std::numbers::pi / d.omega2 <= t_max * (1 + 1e-15); ++k)
            roots.push_back(k * std::numbers::pi / d.omega2);
    } else {
        const double alpha = (d.omega1 + d.omega2) * std::sqrt(d.Omega_minus / d.Omega_plus);
        const double beta =
            std::abs(d.omega1 - d.omega2) * std::sqrt(d.Omega_plus / d.Omega_minus);
        auto scan = [&](double sign) {
            auto fn = [&](double t) {
                return alpha * std::sin(0.5 * d.Omega_plus * t) +
                       sign * beta * std::sin(0.5 * d.Omega_minus * t);
            };
            auto dfn = [&](double t) {
                return 0.5 * alpha * d.Omega_plus * std::cos(0.5 * d.Omega_plus * t) +
                       sign * 0.5 * beta * d.Omega_minus * std::cos(0.5 * d.Omega_minus * t);
            };
            const double step =
                std::min(std::numbers::pi / d.Omega_plus, std::numbers::pi / d.Omega_minus) / 20.0;
            double ta = 0.0, fa = 0.0;
            for (double tb = step; ta < t_max; ta = tb, fa = fn(ta), tb += step) {
                tb = std::min(tb, t_max);
                const double fb = fn(tb);
                bool bracketed = (fa == 0.0 && ta > 0.0) || (fa * fb < 0.0);
                if (fa * fb < 0.0) {
                    double lo = ta, hi = tb;
                    while (hi - lo > 1e-12 * std::max(1.0, hi)) {
                        const double mid = 0.5 * (lo + hi);
                        const double fm = fn(mid);
                        if (fm == 0.0) { lo = hi = mid; break; }
                        if (fa * fm < 0.0) hi = mid; else lo = mid;
                    }
                    // Newton polish to rounding level; the factor roots are
                    // simple, so a couple of steps inside the bracket land
                    // well below the bisection resolution.
                    double r = 0.5 * (lo + hi);
                    for (int it = 0; it < 4; ++it) {
                        const double df = dfn(r);
                        if (df == 0.0) break;
                        const double rn = r - fn(r) / df;
                        if (!(rn > ta && rn < tb)) break;
                        r = rn;
                    }
                    roots.push_back(r);
                } else if (bracketed) {
                    roots.push_back(ta);
                } else if (fb == 0.0 && tb < t_max * (1 + 1e-15)) {
                    // Exact zero on the final sample; later samples would
                    // catch an interior one, but the loop ends at t_max.
                    roots.push_back(tb);
                }
                if (tb >= t_max) break;
            }
        };
        scan(-1.0);
        scan(+1.0);
    }
    std::sort(roots.begin(), roots.end());
    // Coincident roots of the two factors are a single caustic (of higher
    // multiplicity); merge anything closer than the refinement tolerance.
    std::vector<double> merged;
    for (double r : roots) {
        if (merged.empty() || r - merged.back() > 1e-10 * std::max(1.0, r))
            merged.push_back(r);
    }
    return merged;
}

/// Outcome of numerically arbitrating the cross-term factor in the closed
/// action against the kinematic boundary route.
struct CrossFactorReport {
    double chosen = 0;
    double residual_chosen = 0;
    double residual_alternative = 0;
};

/// Compare the closed action with cross factor 4 against factor 2 on a batch
/// of sample endpoints, using action_boundary as the reference. Both routes
/// are exact, so the winning factor should match to rounding error while the
/// loser misses by O(1) on generic endpoints.
inline CrossFactorReport arbitrate_cross_factor(const OscillatorConfig& cfg,
                                                const DerivedFrequencies& d) {
    const double candidates[2] = {4.0, 2.0};
    double worst[2] = {0.0, 0.0};
    const double pts[4][4] = {{1.0, 0.3, -0.7, 0.9},
                              {0.2, -1.1, 0.5, 0.4},
                              {-0.8, 0.6, 1.2, -0.3},
                              {0.5, 0.5, -0.5, 1.0}};
    const double times[3] = {0.17, 0.31, 0.53};
    for (double tscale : times) {
        const double T = tscale * std::numbers::pi / d.Omega_plus;
        for (const auto& p : pts) {
            const Endpoints ep{p[0], p[1], p[2], p[3], T};
            const double ref = action_boundary(ep, cfg, d);
            const double scale = std::max(1.0, std::abs(ref));
            for (int i = 0; i < 2; ++i) {
                const double s = action_closed(ep, cfg, d, candidates[i]);
                worst[i] = std::max(worst[i], std::abs(s - ref) / scale);
            }
        }
    }
    CrossFactorReport rep;
    const int best = worst[0] <= worst[1] ? 0 : 1;
    rep.chosen = candidates[best];
    rep.residual_chosen = worst[best];
    rep.residual_alternative = worst[1 - best];
    return rep;
}

} // namespace maho
